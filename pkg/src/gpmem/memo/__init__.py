"""Statistical memoisation: memo tables, probers and emulators."""
