"""Shared records and file I/O"""
from .models import (
    AnchorCheck,
    BddQuery,
    BetaQuery,
    BoundCheck,
    Certificate,
    CheckResult,
    ClaimCheck,
    CountRow,
    CvpInstance,
    DistanceResult,
    GadgetCountReport,
    GadgetParams,
    GadgetVariant,
    InstanceFile,
    LatticeDescription,
    LemmaReport,
    MaxLinInstance,
    MaxLinSolution,
    NormSpec,
    PointCloud,
    ProblemKind,
    PromiseClass,
    RationalMatrix,
    ReductionArtifacts,
    RegimeReport,
    RunManifest,
    SuiteStats,
    SvpInstance,
    TaylorCertificate,
    ThetaParams,
    TruncatedSumSpec,
    ValuationWitness,
    Verdict,
    fold_shift,
    format_fraction,
)
from .repository import ArtifactStore, get_artifact_store

__all__ = [
    "AnchorCheck", "BddQuery", "BetaQuery", "BoundCheck", "Certificate", "CheckResult",
    "ClaimCheck", "CountRow", "CvpInstance", "DistanceResult", "GadgetCountReport",
    "GadgetParams", "GadgetVariant", "InstanceFile", "LatticeDescription", "LemmaReport",
    "MaxLinInstance", "MaxLinSolution", "NormSpec", "PointCloud", "ProblemKind",
    "PromiseClass", "RationalMatrix", "ReductionArtifacts", "RegimeReport", "RunManifest",
    "SuiteStats", "SvpInstance", "TaylorCertificate", "ThetaParams", "TruncatedSumSpec",
    "ValuationWitness", "Verdict", "fold_shift", "format_fraction",
    "ArtifactStore", "get_artifact_store",
]
