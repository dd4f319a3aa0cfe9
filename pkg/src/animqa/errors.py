"""Exception hierarchy shared by every animqa module."""


class AnimQAError(Exception):
    """Base class for all errors raised by animqa."""


class MalformedInput(AnimQAError):
    pass


class EmptySequence(AnimQAError):
    pass


class NonFiniteCoordinate(AnimQAError):
    pass


class InvalidParameter(AnimQAError):
    pass


class JointCountMismatch(AnimQAError):
    pass


class FrameCountMismatch(AnimQAError):
    pass


class EmptyFrame(AnimQAError):
    pass


class DegenerateDuration(AnimQAError):
    pass


class DegeneratePath(AnimQAError):
    pass


class TooFewFrames(AnimQAError):
    pass


class AllJointsDegenerate(AnimQAError):
    pass


class MissingJointPositions(AnimQAError):
    pass


class InvalidStrength(AnimQAError):
    pass


class TooFewFramesRemaining(AnimQAError):
    pass


class InvalidJointIndex(AnimQAError):
    pass


class WeightRowMismatch(AnimQAError):
    pass


class SingularBlend(AnimQAError):
    pass


class NoRatings(AnimQAError):
    pass


class RankDeficient(AnimQAError):
    pass


class InsufficientData(AnimQAError):
    pass


class LengthMismatch(AnimQAError):
    pass


class ZeroVariance(AnimQAError):
    pass
