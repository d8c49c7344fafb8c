//! Holds only the `acceptance` test target (`cargo test -p qwalk-validation`).
//! It lives in its own package so that a failing criterion does not stop
//! `cargo test --workspace` before the library's own suites have run.
