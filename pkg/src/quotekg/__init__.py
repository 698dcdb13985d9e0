"""quotekg: build a multilingual knowledge graph of quotes from Wikiquote
XML dumps, align quote mentions across languages, and emit RDF."""

__version__ = "0.1.0"
