//! Workflow definition language: parser, validator, compiler.
