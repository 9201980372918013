"""Report writers: deterministic JSON/CSV tables and matplotlib figures."""
