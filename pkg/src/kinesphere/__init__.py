"""kinesphere: platform-invariant spatial commands for articulated robots."""

from .ecl import (
    EclStore,
    PartialPose,
    canonical_value,
    export_store,
    import_store,
    join_poses,
)
from .errors import KinesphereError
from .eurdf import (
    PlatformDescription,
    assemble_platform,
    derive_labels,
    parse_eurdf,
    serialize_eurdf,
    subtree,
    validate,
)
from .kinematics import (
    FidelityReport,
    FrameTransform,
    InstallConfig,
    auto_install,
    forward_kinematics,
    limb_endpoint,
    limb_reach,
    record_install,
    verify_direction,
)
from .resolver import (
    CommandQuery,
    ResolvedTarget,
    Trajectory,
    TranslationDirective,
    compose,
    format_command,
    interpolate,
    overlay,
    parse_command,
    parse_command_file,
    resolve,
)
from .vsam import DirectionPull, VsamSpec, build_vsam, direction_vector, laban26, laban8_middle

__version__ = "0.1.0"

__all__ = [
    "KinesphereError",
    "PlatformDescription",
    "assemble_platform",
    "derive_labels",
    "parse_eurdf",
    "serialize_eurdf",
    "subtree",
    "validate",
    "DirectionPull",
    "VsamSpec",
    "build_vsam",
    "direction_vector",
    "laban26",
    "laban8_middle",
    "EclStore",
    "PartialPose",
    "canonical_value",
    "export_store",
    "import_store",
    "join_poses",
    "FidelityReport",
    "FrameTransform",
    "InstallConfig",
    "auto_install",
    "forward_kinematics",
    "limb_endpoint",
    "limb_reach",
    "record_install",
    "verify_direction",
    "CommandQuery",
    "ResolvedTarget",
    "Trajectory",
    "TranslationDirective",
    "compose",
    "format_command",
    "interpolate",
    "overlay",
    "parse_command",
    "parse_command_file",
    "resolve",
    "__version__",
]
