"""Gender-cue ablation and gender-inclusive coreference evaluation."""
