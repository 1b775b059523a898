//! Every runnable example must succeed.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            self::$name::run_example().unwrap();
        }
    };
}

example!(group_basics, "../examples/group_basics.rs");
example!(popular_sumsets, "../examples/popular_sumsets.rs");
example!(classical_bounds, "../examples/classical_bounds.rs");
example!(structural_witness, "../examples/structural_witness.rs");
example!(extremal_families, "../examples/extremal_families.rs");
example!(restricted_sumsets, "../examples/restricted_sumsets.rs");
example!(exhaustive_scan, "../examples/exhaustive_scan.rs");
example!(tightness_hunt, "../examples/tightness_hunt.rs");
