"""Test suite for hallcert."""
