"""mediacontext: are the media attached to a news article contextually relevant?

The pipeline ingests an article (by URL or as structured data), decodes
embedded or sidecar provenance metadata from the attached media, renders
both into fixed prompts, and asks a language model for a structured
relevance verdict plus follow-up chat.
"""

__version__ = "0.1.0"
