"""
DCLED - Benchmark Harness
Times the algorithm bodies (server evaluations and client decryption) of the
two-server schemes on full quadratic programs, and models the waiting time of
t simultaneous requests at a single-worker server.
"""

from __future__ import annotations

import asyncio
import csv
import logging
import platform
import random
import statistics
import time
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path
from typing import Any, TextIO

from app.core.exceptions import ParameterError
from app.core.field import SchemeParams
from app.core.prf import Label
from app.models.program import QuadraticProgram, eval_plain
from app.models.store_record import SchemeTag
from app.schemas.bench import BenchReport, BenchRow, QueueReport
from app.services.scheme2s_service import TwoServerScheme
from app.services.scheme2v_service import VerifiableTwoServerScheme

logger = logging.getLogger(__name__)


DEFAULT_SIZES = (10, 50, 100, 500, 1000)
BENCH_SCHEMES = (SchemeTag.TWO_SERVER, SchemeTag.TWO_SERVER_VERIFIABLE)
MIN_REPETITIONS = 5


def hardware_note() -> str:
    cpu = platform.processor() or platform.system()
    return f"{platform.machine()} {cpu} py{platform.python_version()}"


def median_time(fn: Callable[[], Any], repetitions: int) -> tuple[float, Any]:
    """Median wall time of fn over the repetitions, plus its last result."""
    samples = []
    result = None
    for _ in range(repetitions):
        started = time.perf_counter()
        result = fn()
        samples.append(time.perf_counter() - started)
    return statistics.median(samples), result


def fit_r2(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Coefficient of determination of the least-squares line through (xs, ys)."""
    if len(xs) < 2 or len(set(xs)) < 2:
        return 1.0
    if len(set(ys)) < 2:
        return 1.0
    return statistics.correlation(xs, ys) ** 2


class Workload:
    """Keys, shares and a full quadratic program over n random inputs."""

    def __init__(
        self, scheme: SchemeTag, n: int, params: SchemeParams, rng: random.Random
    ) -> None:
        self.engine: Any
        if scheme is SchemeTag.TWO_SERVER:
            self.engine = TwoServerScheme(params)
        elif scheme is SchemeTag.TWO_SERVER_VERIFIABLE:
            self.engine = VerifiableTwoServerScheme(params)
        else:
            raise ParameterError(f"bench covers the two-server schemes, not {scheme.value}")
        labels = [Label.of(f"x{i}") for i in range(1, n + 1)]
        values = [params.random_element(rng) for _ in labels]
        self.prog = QuadraticProgram.full_quadratic(labels, params, rng)
        self.expected = eval_plain(self.prog, values)
        self.sk, _ = self.engine.keygen()
        shares = [self.engine.encrypt(self.sk, tau, m) for tau, m in zip(labels, values)]
        self.first = [s[0] for s in shares]
        self.second = [s[1] for s in shares]

    def eval1(self) -> Any:
        return self.engine.eval1(self.prog, self.first)

    def eval2(self) -> Any:
        return self.engine.eval2(self.prog, self.second)

    def decrypt(self, c1: Any, c2: Any) -> Any:
        return self.engine.decrypt(self.sk, self.prog, c1, c2)

    def serve(self) -> Any:
        """One full delegation: both evaluations plus decryption."""
        return self.decrypt(self.eval1(), self.eval2())


class BenchmarkHarness:
    """In-process timing grid for 2S and 2V."""

    def __init__(
        self,
        params: SchemeParams | None = None,
        repetitions: int = MIN_REPETITIONS,
        seed: int = 0,
    ) -> None:
        if repetitions < MIN_REPETITIONS:
            raise ParameterError(f"timings are medians over at least {MIN_REPETITIONS} runs")
        self.params = params or SchemeParams.for_lambda()
        self.repetitions = repetitions
        self.seed = seed

    def run_cell(self, scheme: SchemeTag, n: int) -> BenchRow:
        """Median eval1/eval2/dec for one data size; keygen and encryption are untimed."""
        rng = random.Random(f"{self.seed}:{scheme.value}:{n}")
        work = Workload(scheme, n, self.params, rng)
        t1, c1 = median_time(work.eval1, self.repetitions)
        t2, c2 = median_time(work.eval2, self.repetitions)
        td, value = median_time(lambda: work.decrypt(c1, c2), self.repetitions)

        logger.info(
            f"bench {scheme.value} n={n}: eval1={t1:.4f}s eval2={t2:.4f}s dec={td:.4f}s"
        )
        return BenchRow(
            scheme=scheme,
            n=n,
            quadratic_terms=len(work.prog.quad_terms),
            linear_terms=len(work.prog.lin_terms),
            eval1_seconds=t1,
            eval2_seconds=t2,
            dec_seconds=td,
            repetitions=self.repetitions,
            correct=value == work.expected,
            seed=self.seed,
            hardware=hardware_note(),
        )

    def run(
        self,
        sizes: Iterable[int] = DEFAULT_SIZES,
        schemes: Iterable[SchemeTag] = BENCH_SCHEMES,
    ) -> BenchReport:
        sizes = list(sizes)
        report = BenchReport()
        for scheme in schemes:
            rows = [self.run_cell(scheme, n) for n in sizes]
            report.rows.extend(rows)
            # Dec evaluates f(b), so its cost follows the program size, n(n+1)/2 + n terms.
            report.dec_fit_r2[scheme.value] = fit_r2(
                [float(r.quadratic_terms + r.linear_terms) for r in rows],
                [r.dec_seconds for r in rows],
            )
        return report


def write_report_csv(report: BenchReport, out: TextIO) -> None:
    """One CSV row per cell; columns follow BenchRow."""
    fields = list(BenchRow.model_fields)
    writer = csv.DictWriter(out, fieldnames=fields)
    writer.writeheader()
    for row in report.rows:
        data = row.model_dump()
        data["scheme"] = row.scheme.value
        writer.writerow(data)


def write_report_file(report: BenchReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_report_csv(report, fh)


# =============================================================================
# Queue simulation
# =============================================================================


class QueueSimulator:
    """t identical delegation requests served FIFO by one worker."""

    def __init__(self, params: SchemeParams | None = None, seed: int = 0) -> None:
        self.params = params or SchemeParams.for_lambda()
        self.seed = seed

    def _request(self, scheme: SchemeTag, n: int) -> Callable[[], Any]:
        return Workload(scheme, n, self.params, random.Random(f"{self.seed}:queue:{n}")).serve

    def analytic(
        self,
        t: int,
        n: int,
        scheme: SchemeTag = SchemeTag.TWO_SERVER,
        repetitions: int = MIN_REPETITIONS,
        service_seconds: float | None = None,
    ) -> QueueReport:
        """Request k completes at k*s, so the mean over t requests is s(t+1)/2."""
        if t < 1:
            raise ParameterError("t must be at least 1")
        if service_seconds is None:
            service_seconds, _ = median_time(self._request(scheme, n), repetitions)
        return QueueReport(
            scheme=scheme,
            mode="analytic",
            t=t,
            n=n,
            service_seconds=service_seconds,
            mean_wait_seconds=service_seconds * (t + 1) / 2,
        )

    async def executed(
        self, t: int, n: int, scheme: SchemeTag = SchemeTag.TWO_SERVER
    ) -> QueueReport:
        """Actually run t requests through a one-worker asyncio queue."""
        if t < 1:
            raise ParameterError("t must be at least 1")
        serve = self._request(scheme, n)
        queue: asyncio.Queue[int] = asyncio.Queue()
        completions: list[float] = []
        service: list[float] = []

        started = time.perf_counter()
        for k in range(t):
            queue.put_nowait(k)

        async def worker() -> None:
            while True:
                await queue.get()
                begin = time.perf_counter()
                serve()
                end = time.perf_counter()
                service.append(end - begin)
                completions.append(end - started)
                queue.task_done()

        task = asyncio.create_task(worker())
        await queue.join()
        task.cancel()
        try:
            await task
        except asyncio.CancelledError:
            pass

        return QueueReport(
            scheme=scheme,
            mode="executed",
            t=t,
            n=n,
            service_seconds=statistics.median(service),
            mean_wait_seconds=statistics.fmean(completions),
        )


def write_queue_csv(reports: Sequence[QueueReport], out: TextIO) -> None:
    writer = csv.DictWriter(out, fieldnames=list(QueueReport.model_fields))
    writer.writeheader()
    for report in reports:
        data = report.model_dump()
        data["scheme"] = report.scheme.value
        writer.writerow(data)
