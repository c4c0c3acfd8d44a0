# Empty init for tests.cli package
