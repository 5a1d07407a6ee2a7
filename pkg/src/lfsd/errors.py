"""Exception hierarchy for the lfsd toolkit."""


class LfsdError(Exception):
    """Base class for all toolkit errors."""


# --- schema ---------------------------------------------------------------

class EmptyDataset(LfsdError):
    pass


class MixedKindColumn(LfsdError):
    pass


class UninferableColumn(LfsdError):
    """Column has no non-missing cells, so no kind can be inferred."""


class SynthColumnNotInOriginal(LfsdError):
    """A synthetic column (after affix stripping) has no original counterpart."""


# --- synthesis ------------------------------------------------------------

class MethodMismatch(LfsdError):
    pass


class DegenerateRange(LfsdError):
    """Range has min > max, or no representable value at the declared precision."""


class EmptyOriginal(LfsdError):
    pass


class TransformPreconditionViolated(LfsdError):
    """Original rows violate a transform invariant; reported, never silently fixed."""

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


# --- risk -----------------------------------------------------------------

class UnknownKeyColumn(LfsdError):
    pass


class KeyAfterAffixMismatch(LfsdError):
    """A key column exists in the original but not in the synthetic data after affix stripping."""


class UnknownColumn(LfsdError):
    pass


# --- sdc ------------------------------------------------------------------

class NotNumericOrDate(LfsdError):
    pass


class NotCategorical(LfsdError):
    pass


class InvalidPercentiles(LfsdError):
    pass


class PooledLabelCollision(LfsdError):
    pass


class PartialMapping(LfsdError):
    pass


class StaleReport(LfsdError):
    """Risk report does not describe the dataset it is being applied to."""


class MitigationLoopExceeded(LfsdError):
    pass


# --- checks / cli ---------------------------------------------------------

class MissingOriginalReference(LfsdError):
    pass


class ConfigError(LfsdError):
    """Invalid configuration; message lists every problem found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CsvFormatError(LfsdError):
    pass
