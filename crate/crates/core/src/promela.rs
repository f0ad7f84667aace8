//! PROMELA source emission.
