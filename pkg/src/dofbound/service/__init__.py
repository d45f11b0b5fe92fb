"""HTTP service exposing region computation, comparison and verification."""
