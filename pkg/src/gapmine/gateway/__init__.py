"""Completion client, prompt templates, cache, and mock backend."""
