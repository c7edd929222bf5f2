//! Test-only package: the acceptance report lives in `tests/acceptance.rs`.
//! It is a separate workspace member so that it runs after every other suite.
