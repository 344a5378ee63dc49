//! Brute-force verification harness (suites to come).
