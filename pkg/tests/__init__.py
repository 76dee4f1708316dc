"""Test suite for lowdisc."""
