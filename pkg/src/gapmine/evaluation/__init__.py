"""Scoring: ROUGE-L matching, cue validation, entailment, calibration."""
