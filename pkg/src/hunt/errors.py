"""Exception taxonomy shared across the package.

Every operational failure raises a subclass of HuntError carrying a stable
``code`` string so the CLI and HTTP layer can map errors without string
matching on messages.
"""


class HuntError(Exception):
    code = "error"


# --- dataset ---------------------------------------------------------------

class EmptyInput(HuntError):
    code = "empty_input"


class WrongArity(HuntError):
    code = "wrong_arity"

    def __init__(self, line, found):
        super().__init__(f"line {line}: expected 41 or 42 fields, found {found}")
        self.line = line
        self.found = found


class ParseError(HuntError):
    code = "parse_error"

    def __init__(self, line, field, detail=""):
        msg = f"line {line}: bad value for field '{field}'"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.line = line
        self.field = field


class UnknownToken(HuntError):
    code = "unknown_token"

    def __init__(self, feature, token):
        super().__init__(f"unknown categorical token {token!r} for feature '{feature}'")
        self.feature = feature
        self.token = token


# --- forest -----------------------------------------------------------------

class SingleClass(HuntError):
    code = "single_class"


class ModelError(HuntError):
    code = "model_error"


class VersionMismatch(HuntError):
    code = "version_mismatch"


class ChecksumMismatch(HuntError):
    code = "checksum_mismatch"


class TruncatedModel(HuntError):
    code = "truncated_model"


# --- explainers ---------------------------------------------------------------

class MissingCoverWeights(HuntError):
    code = "missing_cover_weights"


class TooManyFeatures(HuntError):
    code = "too_many_features"


class DegenerateVariance(HuntError):
    code = "degenerate_variance"


class PlotRenderError(HuntError):
    code = "plot_render_error"


# --- stores -------------------------------------------------------------------

class Unreachable(HuntError):
    code = "unreachable"


class AuthFailed(HuntError):
    code = "auth_failed"


class MappingConflict(HuntError):
    code = "mapping_conflict"


class ForeignKeyMissing(HuntError):
    code = "foreign_key_missing"


class WriteConflict(HuntError):
    code = "write_conflict"


class NotFound(HuntError):
    code = "not_found"


class BadFilter(HuntError):
    code = "bad_filter"


class IntegrityError(HuntError):
    code = "integrity_error"


class StoreUnavailable(HuntError):
    code = "store_unavailable"


# --- assistant ------------------------------------------------------------------

class TemplateMissing(HuntError):
    code = "template_missing"


class ContextOverflow(HuntError):
    code = "context_overflow"


class TransportError(HuntError):
    code = "transport_error"


class FixtureMiss(HuntError):
    code = "fixture_miss"


class SessionNotFound(HuntError):
    code = "session_not_found"


class ArtifactMissing(HuntError):
    code = "artifact_missing"


# --- evaluation -------------------------------------------------------------------

class EmptyText(HuntError):
    code = "empty_text"


class ZeroSentences(HuntError):
    code = "zero_sentences"


class ZeroWords(HuntError):
    code = "zero_words"


class EmptyCorpus(HuntError):
    code = "empty_corpus"


class FixtureInvalid(HuntError):
    code = "fixture_invalid"
