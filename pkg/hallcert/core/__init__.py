"""Fields, matrices, forms, models and the output plumbing of hallcert."""
