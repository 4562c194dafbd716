//! Every example runs to completion.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(geometry, "../examples/geometry.rs");
example!(single_atom, "../examples/single_atom.rs");
example!(pair_steady_state, "../examples/pair_steady_state.rs");
example!(channels, "../examples/channels.rs");
example!(enhancement, "../examples/enhancement.rs");
example!(elastic, "../examples/elastic.rs");
example!(cone, "../examples/cone.rs");
example!(closed_forms, "../examples/closed_forms.rs");
example!(sweep, "../examples/sweep.rs");
example!(detuning, "../examples/detuning.rs");
example!(radial_average, "../examples/radial_average.rs");
