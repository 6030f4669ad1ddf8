"""Command-line surface.

Subcommands reproduce the full experimental pipeline on user data:

- ``pareto``     front vertices and their (nU, nF) per query
- ``decompose``  ranking distribution for a front point or explicit target
- ``deliver``    balanced-word ranking sequence and its unfairness trace
- ``evaluate``   (nU, nF) tables for EXPO / controller / softmax-sampling
  sweeps after delivering T rankings per query
- ``reduce``     rewrite cascade click-model parameters in DBN form

Queries are read from JSONL (one object with ``query_id``, ``relevances``
and optional ``merits`` per line) or CSV (``query_id,item_id,relevance``
with an optional ``merit`` column, grouped by query, items ordered by
item id).  Permutations are serialized 1-based.  Exit codes: 0 on success,
1 on validation errors, 2 on infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .caratheodory import decompose as decompose_point
from .click_models import ClickModelSpec, DbnParams, exposure_batch, reduce_to_dbn
from .errors import ExpofairError, ValidationError
from .evaluation import (
    TRIVIAL_TOL,
    MethodSpec,
    MetricReport,
    QueryInstance,
    resolve_merits,
    run_experiment,
)
from .expohedron import Expohedron
from .pareto import build_front, select_tradeoff
from .policies import DeliverySchedule

__all__ = ["main", "ingest", "DEFAULT_CTRL_GAINS", "DEFAULT_PL_TEMPERATURES"]

#: EXPO trade-off grid: 0 to 1 in steps of 0.05
DEFAULT_EXPO_ALPHAS = [round(0.05 * k, 2) for k in range(21)]
#: controller gains, log-spaced in [0.0001, 1]
DEFAULT_CTRL_GAINS = np.logspace(-4, 0, 12).tolist()
#: sampling temperatures, log-spaced in [0.001, 50]
DEFAULT_PL_TEMPERATURES = np.logspace(np.log10(0.001), np.log10(50.0), 12).tolist()


def _fmt(x: float) -> str:
    """12 significant digits, enough to compare against test tolerances."""
    return f"{float(x):.12g}"


# ----------------------------------------------------------------------
# ingestion


def _scale_relevance(raw: float, scale: float | None, where: str) -> float:
    value = raw / scale if scale else raw
    if not (0.0 <= value <= 1.0):
        raise ValidationError(
            f"{where}: relevance {raw!r} falls outside [0, 1]"
            + (f" after dividing by {scale}" if scale else "")
        )
    return value


def _ingest_jsonl(path: str, scale: float | None) -> list[QueryInstance]:
    queries: list[QueryInstance] = []
    seen: set[str] = set()
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            if "query_id" not in record or "relevances" not in record:
                raise ValidationError(f"{path}:{lineno}: need 'query_id' and 'relevances'")
            qid = str(record["query_id"])
            if qid in seen:
                raise ValidationError(f"{path}:{lineno}: duplicate query_id {qid!r}")
            seen.add(qid)
            try:
                relevances = [
                    _scale_relevance(float(r), scale, f"{path}:{lineno}")
                    for r in record["relevances"]
                ]
                merits = record.get("merits")
                queries.append(
                    QueryInstance(
                        qid,
                        np.array(relevances),
                        None if merits is None else np.asarray(merits, dtype=float),
                    )
                )
            except ValidationError:
                raise
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    if not queries:
        raise ValidationError(f"{path}: no queries found")
    return queries


def _ingest_csv(path: str, scale: float | None) -> list[QueryInstance]:
    rows: dict[str, dict] = {}
    order: list[str] = []
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        for column in ("query_id", "item_id", "relevance"):
            if column not in fields:
                raise ValidationError(f"{path}: missing column {column!r}")
        has_merit = "merit" in fields
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            qid = row["query_id"]
            item = row["item_id"]
            if qid is None or item is None or row["relevance"] is None:
                raise ValidationError(f"{where}: short row, expected {len(fields)} columns")
            try:
                relevance = _scale_relevance(float(row["relevance"]), scale, where)
                merit = (
                    float(row["merit"]) if has_merit and row["merit"] not in ("", None) else None
                )
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"{where}: {exc}") from exc
            group = rows.setdefault(qid, {})
            if qid not in order:
                order.append(qid)
            if item in group:
                raise ValidationError(f"{where}: duplicate (query_id, item_id) = ({qid}, {item})")
            group[item] = (relevance, merit)
    if not rows:
        raise ValidationError(f"{path}: no queries found")

    def item_key(item: str):
        try:
            return (0, float(item), item)
        except ValueError:
            return (1, 0.0, item)

    queries = []
    for qid in order:
        group = rows[qid]
        items = sorted(group, key=item_key)
        relevances = np.array([group[i][0] for i in items])
        merit_values = [group[i][1] for i in items]
        merits = None
        if any(m is not None for m in merit_values):
            if any(m is None for m in merit_values):
                raise ValidationError(f"{path}: query {qid!r} has a partially filled merit column")
            merits = np.array(merit_values, dtype=float)
        queries.append(QueryInstance(qid, relevances, merits))
    return queries


def ingest(path: str, fmt: str, scale_labels: float | None = None) -> list[QueryInstance]:
    """Read query instances from a JSONL or CSV file.

    ``scale_labels`` divides graded labels (e.g. 0..4) by the given maximum
    before the [0, 1] range check.
    """
    if scale_labels is not None and scale_labels <= 0:
        raise ValidationError("--scale-labels must be positive")
    if fmt == "jsonl":
        return _ingest_jsonl(path, scale_labels)
    if fmt == "csv":
        return _ingest_csv(path, scale_labels)
    raise ValidationError(f"unknown input format {fmt!r}; expected jsonl or csv")


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    if path.endswith(".jsonl") or path.endswith(".json"):
        return "jsonl"
    if path.endswith(".csv"):
        return "csv"
    raise ValidationError(f"cannot infer input format of {path!r}; pass --input-format")


# ----------------------------------------------------------------------
# shared per-query preparation


def _prepare(query: QueryInstance, params: DbnParams, fairness: str):
    try:
        eh = Expohedron(params, query.relevances)
        mu = resolve_merits(query, fairness)
        target, shift = eh.target_exposure(mu)
    except ExpofairError as exc:
        # surface core-module failures with the query they belong to
        raise type(exc)(f"query {query.query_id!r}: {exc}") from exc
    return eh, target, shift


# ----------------------------------------------------------------------
# output helpers


def _write_json(payload, out):
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(header, rows, out):
    if out:
        handle = open(out, "w", newline="")
    else:
        handle = sys.stdout
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if out:
            handle.close()


def _map_queries(worker, tasks, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, tasks))
    return [worker(task) for task in tasks]


# ----------------------------------------------------------------------
# subcommands


def _pareto_one(task):
    query, params, fairness = task
    eh, target, shift = _prepare(query, params, fairness)
    try:
        front = build_front(eh, target)
    except ExpofairError as exc:
        raise type(exc)(f"query {query.query_id!r}: {exc}") from exc
    return {
        "query_id": query.query_id,
        "shift": shift,
        "target": [float(x) for x in target],
        "vertices": [[float(x) for x in v] for v in front.vertices],
        "nU": [float(u) for u in front.n_utility],
        "nF": [float(f) for f in front.n_unfairness],
    }


def _cmd_pareto(args, queries, params) -> None:
    tasks = [(q, params, args.fairness) for q in queries]
    results = _map_queries(_pareto_one, tasks, args.jobs)
    if args.format == "json":
        _write_json(results, args.out)
    else:
        rows = [
            [
                r["query_id"],
                j,
                _fmt(r["nU"][j]),
                _fmt(r["nF"][j]),
                " ".join(_fmt(x) for x in vertex),
            ]
            for r in results
            for j, vertex in enumerate(r["vertices"])
        ]
        _write_csv(["query_id", "vertex", "nU", "nF", "exposure"], rows, args.out)


def _decompose_one(task):
    query, params, fairness, alpha, explicit_target = task
    eh, target, shift = _prepare(query, params, fairness)
    try:
        if explicit_target is not None:
            point = np.asarray(explicit_target, dtype=float)
        else:
            front = build_front(eh, target)
            point = select_tradeoff(front, alpha, eh, target)
        dist = decompose_point(point, eh)
    except ExpofairError as exc:
        raise type(exc)(f"query {query.query_id!r}: {exc}") from exc
    return {
        "query_id": query.query_id,
        "alpha": None if explicit_target is not None else alpha,
        "point": [float(x) for x in point],
        "atoms": [
            {"weight": float(w), "ranking": r.to_one_indexed()} for w, r in dist
        ],
    }


def _cmd_decompose(args, queries, params) -> None:
    explicit = None
    if args.target is not None:
        if len(queries) != 1:
            raise ValidationError("--target requires exactly one query in the input")
        explicit = json.loads(args.target)
    tasks = [(q, params, args.fairness, args.alpha, explicit) for q in queries]
    results = _map_queries(_decompose_one, tasks, args.jobs)
    if args.format == "json":
        _write_json(results, args.out)
    else:
        rows = [
            [
                r["query_id"],
                j,
                _fmt(atom["weight"]),
                " ".join(str(i) for i in atom["ranking"]),
            ]
            for r in results
            for j, atom in enumerate(r["atoms"])
        ]
        _write_csv(["query_id", "atom", "weight", "ranking"], rows, args.out)


def _deliver_one(task):
    query, params, fairness, alpha, horizon = task
    eh, target, shift = _prepare(query, params, fairness)
    try:
        front = build_front(eh, target)
        point = select_tradeoff(front, alpha, eh, target)
        dist = decompose_point(point, eh)
    except ExpofairError as exc:
        raise type(exc)(f"query {query.query_id!r}: {exc}") from exc
    schedule = DeliverySchedule(dist)
    indices = schedule.take_indices(horizon)
    table = exposure_batch(np.vstack([r.items for r in dist.rankings]), params, eh.rho)
    means = np.cumsum(table[indices], axis=0) / np.arange(1, horizon + 1)[:, None]
    denom = float(np.linalg.norm(eh.prp_exposure - target))
    trace = (
        (np.linalg.norm(means - target, axis=1) / denom).tolist()
        if denom > TRIVIAL_TOL
        else [0.0] * horizon
    )
    sequence = [dist.rankings[i].to_one_indexed() for i in indices]
    return {"query_id": query.query_id, "sequence": sequence, "nF_trace": trace}


def _cmd_deliver(args, queries, params) -> None:
    tasks = [(q, params, args.fairness, args.alpha, args.T) for q in queries]
    results = _map_queries(_deliver_one, tasks, args.jobs)
    if args.format == "json":
        _write_json(results, args.out)
    else:
        rows = [
            [
                r["query_id"],
                t + 1,
                " ".join(str(i) for i in ranking),
                _fmt(r["nF_trace"][t]),
            ]
            for r in results
            for t, ranking in enumerate(r["sequence"])
        ]
        _write_csv(["query_id", "t", "ranking", "nF_t"], rows, args.out)


def _evaluate_methods(args) -> list[MethodSpec]:
    methods = []
    if args.method in ("expo", "all"):
        alphas = [args.alpha] if args.alpha is not None else DEFAULT_EXPO_ALPHAS
        methods += [MethodSpec.expo(a) for a in alphas]
    if args.method in ("ctrl", "all"):
        gains = [args.gain] if args.gain is not None else DEFAULT_CTRL_GAINS
        methods += [MethodSpec.ctrl(g) for g in gains]
    if args.method in ("pl", "all"):
        taus = [args.tau] if args.tau is not None else DEFAULT_PL_TEMPERATURES
        methods += [MethodSpec.pl(t) for t in taus]
    return methods


def _cmd_evaluate(args, queries, params) -> None:
    reports = [
        run_experiment(
            queries,
            method,
            args.T,
            params,
            fairness=args.fairness,
            seed=args.seed,
            trace=args.trace,
            jobs=args.jobs,
        )
        for method in _evaluate_methods(args)
    ]
    if args.format == "json":
        _write_json([r.to_dict() for r in reports], args.out)
    else:
        with_trace = args.trace
        rows = []
        for report in reports:
            for row in report.csv_rows():
                rows.append(
                    [row[0], row[1], _fmt(row[2])]
                    + [_fmt(v) if v != "" else "" for v in row[3:]]
                )
            aggregate = [
                "ALL",
                report.method.kind,
                _fmt(report.method.param),
                _fmt(report.mean_n_utility),
                _fmt(report.mean_n_unfairness),
            ]
            rows.append(aggregate + ["", ""] if with_trace else aggregate)
        _write_csv(MetricReport.csv_header(with_trace), rows, args.out)


def _cmd_reduce(args) -> None:
    with open(args.input) as handle:
        payload = json.load(handle)
    specs = payload if isinstance(payload, list) else [payload]
    results = []
    for record in specs:
        variant = record.get("variant", "").upper()
        if variant == "CM":
            spec = ClickModelSpec.cascade(record["attraction"])
        elif variant == "SDBN":
            spec = ClickModelSpec.sdbn(record["attraction"], record["satisfaction"])
        elif variant == "DCM":
            spec = ClickModelSpec.dcm(record["attraction"], record["lambda"])
        elif variant == "CCM":
            spec = ClickModelSpec.ccm(
                record["attraction"], record["tau1"], record["tau2"], record["tau3"]
            )
        else:
            raise ValidationError(f"unknown click model variant {variant!r}")
        params, rho = reduce_to_dbn(spec)
        results.append(
            {
                "variant": variant,
                "gamma": params.gamma,
                "kappa": params.kappa,
                "rho": [float(r) for r in rho],
            }
        )
    output = results if isinstance(payload, list) else results[0]
    if args.format == "json":
        _write_json(output, args.out)
    else:
        rows = [
            [r["variant"], _fmt(r["gamma"]), _fmt(r["kappa"]), i, _fmt(value)]
            for r in results
            for i, value in enumerate(r["rho"], start=1)
        ]
        _write_csv(["variant", "gamma", "kappa", "item", "rho"], rows, args.out)


# ----------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1 for
    # anything validation-shaped and 2 only for infeasibility
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="expofair", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p, with_input=True):
        if with_input:
            p.add_argument("input", help="queries file (JSONL or CSV)")
            p.add_argument("--input-format", choices=["jsonl", "csv"], default=None)
            p.add_argument(
                "--scale-labels",
                type=float,
                default=None,
                metavar="MAX",
                help="divide graded relevance labels by MAX before validation",
            )
        p.add_argument("--gamma", type=float, default=0.5)
        p.add_argument("--kappa", type=float, default=0.7)
        p.add_argument(
            "--fairness",
            choices=["meritocratic", "demographic", "custom"],
            default="meritocratic",
        )
        p.add_argument("--alpha", type=float, default=None, help="trade-off in [0, 1]")
        p.add_argument("--T", type=int, default=1000, help="delivery horizon")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers over queries")

    p_pareto = sub.add_parser("pareto", help="front vertices and their metrics")
    add_shared(p_pareto)

    p_dec = sub.add_parser("decompose", help="ranking distribution of a front point")
    add_shared(p_dec)
    p_dec.add_argument(
        "--target",
        default=None,
        help="explicit exposure vector (JSON array); requires a single query",
    )

    p_del = sub.add_parser("deliver", help="balanced ranking sequence and nF trace")
    add_shared(p_del)

    p_eval = sub.add_parser("evaluate", help="method sweeps after T deliveries")
    add_shared(p_eval)
    p_eval.add_argument("--method", choices=["expo", "ctrl", "pl", "all"], default="all")
    p_eval.add_argument("--gain", type=float, default=None, help="single controller gain")
    p_eval.add_argument("--tau", type=float, default=None, help="single sampling temperature")
    p_eval.add_argument("--trace", action="store_true", help="record per-step nF traces")

    p_red = sub.add_parser("reduce", help="click-model spec file to DBN parameters")
    p_red.add_argument("input", help="JSON file with a spec object or list of them")
    p_red.add_argument("--out", default=None)
    p_red.add_argument("--format", choices=["json", "csv"], default="json")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code or 0)
    try:
        if args.command == "reduce":
            _cmd_reduce(args)
            return 0
        if args.alpha is not None and not (0.0 <= args.alpha <= 1.0):
            raise ValidationError("--alpha must lie in [0, 1]")
        params = DbnParams(gamma=args.gamma, kappa=args.kappa)
        fmt = _infer_format(args.input, args.input_format)
        queries = ingest(args.input, fmt, args.scale_labels)
        if args.command == "pareto":
            _cmd_pareto(args, queries, params)
        elif args.command == "decompose":
            if args.alpha is None:
                args.alpha = 0.0
            _cmd_decompose(args, queries, params)
        elif args.command == "deliver":
            if args.alpha is None:
                args.alpha = 0.0
            _cmd_deliver(args, queries, params)
        elif args.command == "evaluate":
            _cmd_evaluate(args, queries, params)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ExpofairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
