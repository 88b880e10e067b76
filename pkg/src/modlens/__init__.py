"""modlens: interpretable comment moderation.

Recurrent binary classifiers over hashed subword embeddings, rationale
extraction trained with policy gradients, evaluation reports, and a
review-queue HTTP service, all on a small self-contained autodiff engine.
"""

__version__ = "0.1.0"
