import logging
from collections.abc import Callable

import numpy as np
from frameshrink import penalty, prox, solver
from frameshrink.errors import ConfigurationError, FrameshrinkError
from frameshrink.frame import (
    Frame,
    identity_frame,
    toy_frame,
    udwt_1d,
    udwt_2d,
    verify_parseval,
)
from frameshrink.penalty import PenaltyKind
from frameshrink.schemas import PropertyReport
from frameshrink.solver import ConvexityStatus, ProblemSpec, SolverConfig
from payload_models.payloads import ExperimentConfig, VerifyRow

from core.utils import _m, context, get_extra_info
from services.const import (
    VERIFY_BOUNDARY_A,
    VERIFY_NONCONVEX_A,
    VERIFY_ORACLE_PARAMS,
    VERIFY_ORACLE_TOL,
    VERIFY_PARSEVAL_TOL,
    VERIFY_PENALTY_PARAMS,
    VERIFY_TRIALS,
)

logger = logging.getLogger(__name__)

CURVED_PENALTIES = [PenaltyKind.RATIONAL, PenaltyKind.LOG, PenaltyKind.ATAN]


class VerifyService:
    """Self-checks of the numerical core; any failed row makes the run fail."""

    def builtin_frames(self) -> list[Frame]:
        return [identity_frame(64), toy_frame(), udwt_1d(256, 4), udwt_2d(64, 64, 3)]

    def _guarded(self, suite: str, subject: str, check: str, fn: Callable[[], list[VerifyRow]]):
        try:
            return fn()
        except FrameshrinkError as exc:
            return [VerifyRow(suite=suite, subject=subject, check=check, passed=False, detail=str(exc))]

    def _from_report(self, suite: str, report: PropertyReport) -> list[VerifyRow]:
        return [
            VerifyRow(
                suite=suite,
                subject=report.subject,
                check=check.name,
                passed=check.passed,
                worst=check.worst,
                detail=check.detail,
            )
            for check in report.checks
        ]

    def check_frames(self, config: ExperimentConfig) -> list[VerifyRow]:
        rows = []
        for frame in self.builtin_frames():
            rows += self._guarded(
                "parseval",
                frame.name,
                "construct",
                lambda frame=frame: self._from_report(
                    "parseval",
                    verify_parseval(
                        frame, trials=VERIFY_TRIALS, tol=VERIFY_PARSEVAL_TOL, seed=config.seed
                    ),
                ),
            )
        return rows

    def check_penalties(self) -> list[VerifyRow]:
        cases = [(kind, a) for kind in CURVED_PENALTIES for a in VERIFY_PENALTY_PARAMS]
        cases.append((PenaltyKind.ABS, 0.0))
        rows = []
        for kind, a in cases:
            rows += self._guarded(
                "penalty",
                f"{kind.value}(a={a:g})",
                "regularity",
                lambda kind=kind, a=a: self._from_report(
                    "penalty", _with_subject(penalty.check_assumption1(kind, a), kind, a)
                ),
            )
        return rows

    def _toy_status(self, a: float) -> ConvexityStatus:
        spec = ProblemSpec(
            y=np.zeros(2), frame=toy_frame(), kind=PenaltyKind.ATAN, lam=1.0, a=a
        )
        return solver.validate_convexity(spec)

    def check_convexity(self, config: ExperimentConfig) -> list[VerifyRow]:
        probes = [
            (VERIFY_BOUNDARY_A, "boundary", lambda s: s is ConvexityStatus.BOUNDARY_CONVEX),
            (VERIFY_NONCONVEX_A, "beyond_boundary", lambda s: s is ConvexityStatus.NON_CONVEX),
            (config.toy_a, "configured_a", lambda s: s is not ConvexityStatus.NON_CONVEX),
        ]
        rows = []
        for a, check, expected in probes:

            def probe(a=a, check=check, expected=expected):
                status = self._toy_status(a)
                return [
                    VerifyRow(
                        suite="convexity",
                        subject=f"toy(a={a:g}, lambda=1)",
                        check=check,
                        passed=expected(status),
                        worst=a * toy_frame().r,
                        detail=status.value,
                    )
                ]

            rows += self._guarded("convexity", f"toy(a={a:g})", check, probe)
        return rows

    def check_mu_guard(self, config: ExperimentConfig) -> list[VerifyRow]:
        rows = []
        for frame in self.builtin_frames():
            r = frame.r
            try:
                solver.validate_mu(1.0 / r, r)
                rejected, detail = False, "mu = 1/r was accepted"
            except ConfigurationError as exc:
                rejected, detail = True, str(exc)
            rows.append(
                VerifyRow(
                    suite="mu_guard",
                    subject=frame.name,
                    check="rejects_mu_at_1_over_r",
                    passed=rejected,
                    worst=1.0 / r,
                    detail=detail,
                )
            )

            mu = SolverConfig(mu=config.mu).resolve_mu(r)
            try:
                solver.validate_mu(mu, r)
                accepted, detail = True, ""
            except ConfigurationError as exc:
                accepted, detail = False, str(exc)
            rows.append(
                VerifyRow(
                    suite="mu_guard",
                    subject=frame.name,
                    check="accepts_configured_mu",
                    passed=accepted,
                    worst=mu,
                    detail=detail,
                )
            )
        return rows

    def check_oracle(self, config: ExperimentConfig) -> list[VerifyRow]:
        """On the identity frame ADMM must land on the scalar threshold of y."""
        frame = identity_frame(64)
        y = 2.0 * np.random.default_rng(config.seed).standard_normal(frame.n)
        solver_config = SolverConfig(max_iter=5000, tol=1e-12)
        rows = []
        for a in VERIFY_ORACLE_PARAMS:

            def oracle(a=a):
                spec = ProblemSpec(y=y, frame=frame, kind=PenaltyKind.RATIONAL, lam=1.0, a=a)
                result = solver.admm_solve(spec, solver_config)
                expected = prox.threshold(PenaltyKind.RATIONAL, y, 1.0, a)
                gap = float(np.max(np.abs(result.x - expected)))
                return [
                    VerifyRow(
                        suite="oracle",
                        subject=f"identity(n={frame.n}) rational(a={a:g})",
                        check="admm_matches_threshold",
                        passed=gap <= VERIFY_ORACLE_TOL,
                        worst=gap,
                        detail=f"{result.iterations} iterations",
                    )
                ]

            rows += self._guarded("oracle", f"rational(a={a:g})", "admm_matches_threshold", oracle)
        return rows

    def run(self, config: ExperimentConfig) -> list[VerifyRow]:
        context.set("verify")
        rows = (
            self.check_frames(config)
            + self.check_penalties()
            + self.check_convexity(config)
            + self.check_mu_guard(config)
            + self.check_oracle(config)
        )
        failed = [row for row in rows if not row.passed]
        for row in failed:
            logger.error(
                _m(
                    "Verification failed",
                    extra=get_extra_info(
                        {"suite": row.suite, "subject": row.subject, "check": row.check}
                    ),
                )
            )
        logger.info(_m("Verification finished", extra={"checks": len(rows), "failed": len(failed)}))
        return rows


def _with_subject(report: PropertyReport, kind: PenaltyKind, a: float) -> PropertyReport:
    return report.model_copy(update={"subject": f"{kind.value}(a={a:g})"})
