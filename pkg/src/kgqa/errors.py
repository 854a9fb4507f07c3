"""Exception types shared across the pipeline."""


class KgqaError(Exception):
    """Base class for all errors raised by this package."""


class MalformedFile(KgqaError):
    """A dataset or config file violates its expected schema."""


class DuplicateId(MalformedFile):
    """Two questions in one benchmark file share an id."""


class MissingLanguage(KgqaError):
    """An item lacks text in the requested language."""


class LexError(KgqaError):
    """Query text could not be tokenized (unterminated IRI or string)."""


class CollisionError(KgqaError):
    """Input already contains a reserved placeholder lexeme."""


class NotATree(KgqaError):
    """Token head indices do not form a single rooted tree."""


class UnsupportedLanguage(KgqaError):
    """No provider is configured for the requested language."""


class ProviderUnavailable(KgqaError):
    """An annotation/linking provider failed (network, file, or lookup)."""


class MissingAux(KgqaError):
    """Composer config demands a feature the auxiliary bundle lacks."""


class SeparatorNotAtomic(KgqaError):
    """A separator or pad lexeme is not a single unit under the tokenizer."""


class BackendUnavailable(KgqaError):
    """Generation backend is down or returned a transport-level error."""


class GenerationTimeout(KgqaError):
    """Generation backend missed its per-request deadline."""


class MalformedTerm(KgqaError):
    """A SPARQL-results term is not well-formed."""


class EmptyInput(KgqaError):
    """An aggregate was requested over zero per-question scores."""


class SystemicFailure(KgqaError):
    """Backend or endpoint unusable at startup; the whole run must abort."""
