//! Holds the `acceptance` test target; run it with
//! `cargo test -p coded-caching-validation --test acceptance`.
