macro_rules! example {
    ($module:ident, $test:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(simulate_paths, simulate_paths_runs, "simulate_paths.rs");
example!(laplace_routes, laplace_routes_runs, "laplace_routes.rs");
example!(vector_transform, vector_transform_runs, "vector_transform.rs");
example!(density_curves, density_curves_runs, "density_curves.rs");
example!(exponential_functional, exponential_functional_runs, "exponential_functional.rs");
example!(bougerol, bougerol_runs, "bougerol.rs");
example!(squared_bessel, squared_bessel_runs, "squared_bessel.rs");
example!(exponential_time, exponential_time_runs, "exponential_time.rs");
example!(special_functions, special_functions_runs, "special_functions.rs");
example!(statistics, statistics_runs, "statistics.rs");
example!(reproducible_streams, reproducible_streams_runs, "reproducible_streams.rs");
example!(acceptance_suite, acceptance_suite_runs, "acceptance_suite.rs");
