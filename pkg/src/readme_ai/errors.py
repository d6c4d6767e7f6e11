"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ReadmeAiError(Exception):
    """Base class for all errors raised by this package."""


class SourceResolutionError(ReadmeAiError):
    """A name or URL could not be resolved to a data source."""


class RegistryCollisionError(ReadmeAiError):
    """A name is already registered to a different URL."""


class AcquisitionError(ReadmeAiError):
    """Cloning or updating a data source failed."""


class SpecMissingError(ReadmeAiError):
    """The acquired source has no Readme_AI.json at its root."""


class SpecInvalidError(ReadmeAiError):
    """A Readme_AI.json file failed to parse.

    ``diagnostics`` carries the full list of parse errors.
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class DispatchError(ReadmeAiError):
    """No handler is registered for a structured entry's type tag."""

    def __init__(self, tag: str, registered):
        self.tag = tag
        self.registered = sorted(registered)
        super().__init__(
            f"no handler registered for type tag {tag!r} "
            f"(registered tags: {', '.join(self.registered)})"
        )


class BuildError(ReadmeAiError):
    """Context assembly produced nothing usable.

    Raised only when a document has entries to process and every one of
    them failed; per-entry failures otherwise surface as report diagnostics.
    """

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])
