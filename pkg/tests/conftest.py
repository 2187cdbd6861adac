# Tests import shared fixtures from sibling test modules (test_pipeline
# provides the simulation configs); this file keeps the tests directory on
# sys.path regardless of how pytest is invoked.
