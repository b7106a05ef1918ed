"""Postcondition inference and counterexample-driven refinement."""
