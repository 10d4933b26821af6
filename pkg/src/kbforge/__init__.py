"""kbforge: knowledge-base completion toolkit.

Builds unbiased fact benchmarks from Wikidata dumps, probes fill-mask
backends with cloze prompts, calibrates per-relation precision thresholds,
generates high-accuracy candidate facts, and runs a human review workflow.
"""

__version__ = "0.1.0"
