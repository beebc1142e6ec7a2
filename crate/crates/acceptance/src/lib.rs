//! Holds the `acceptance` test target. Kept in its own package so that it runs
//! after every other test binary in the workspace: its report exits non-zero
//! when any criterion fails, and `cargo test` stops at the first failing binary.
