"""Command line entry points for the full pipeline.

Verbs: downsample, identify, stabilize, match, bind, check, simulate,
serve. Exit codes separate engineering verdicts from tooling failures:
0 success, 1 analysis ran and the verdict is negative (check with
violations), 2 usage errors, 3 unreadable or unparseable inputs.

Reports are JSON with keys in a fixed order and floats printed to 9
significant digits, so identical inputs and flags give byte-identical
bytes. Data outputs (PLY, record CSV) use exact round-trip encodings
instead. A verb that fails writes nothing to its output targets.
"""

import argparse
import asyncio
import sys

import numpy as np

from . import deformation, jsonio, oma, pointcloud
from .errors import BridgeroomError
from .session import server as session_server


class UsageError(Exception):
    """Bad option value; maps to exit code 2."""


# ------------------------------------------------------------------- helpers

def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def _read_text(path):
    with open(path, "r") as fh:
        return fh.read()


def _write_bytes(path, data):
    with open(path, "wb") as fh:
        fh.write(data)


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _emit_report(doc, out_path):
    text = jsonio.dumps(doc, floats="report")
    if out_path:
        _write_text(out_path, text)
    else:
        sys.stdout.write(text)


def _parse_floats(text, flag):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError("%s must be comma-separated numbers" % flag) \
            from None
    if not values:
        raise UsageError("%s must name at least one value" % flag)
    return values


def _parse_vec3(text, flag):
    values = _parse_floats(text, flag)
    if len(values) != 3:
        raise UsageError("%s needs exactly three values" % flag)
    return values


def _parse_orders(text):
    """Model orders as 'start:stop:step' (inclusive) or 'a,b,c'."""
    try:
        if ":" in text:
            parts = [int(v) for v in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            orders = list(range(start, stop + 1, step))
        else:
            orders = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(
            "--orders must be start:stop[:step] or a comma list") from None
    if not orders or any(o < 1 for o in orders):
        raise UsageError("--orders must name orders >= 1")
    return orders


def _parse_mask(text):
    flags = text.split(",")
    if len(flags) != 3 or any(f not in ("0", "1") for f in flags):
        raise UsageError("--axes must be three 0/1 flags, e.g. 0,1,0")
    return tuple(int(f) for f in flags)


def _parse_bind_addr(text):
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise UsageError("--bind must be addr:port")
    try:
        port = int(port)
    except ValueError:
        raise UsageError("--bind port must be an integer") from None
    if not 0 <= port <= 65535:
        raise UsageError("--bind port out of range")
    return host, port


def _mode_dicts(modal_set):
    return oma.modal_set_to_dict(modal_set)["modes"]


# --------------------------------------------------------------------- verbs

def _run_downsample(args):
    if not args.voxel > 0:
        raise UsageError("--voxel must be > 0")
    anchor = _parse_vec3(args.anchor, "--anchor") if args.anchor else None
    pc = pointcloud.load_ply(_read_bytes(args.input))
    out = pointcloud.voxel_downsample(pc, args.voxel, anchor=anchor)
    _write_bytes(args.output, pointcloud.save_ply(out,
                                                  encoding=args.encoding))
    print("kept %d of %d points" % (len(out), len(pc)))
    return 0


def _check_ssi_flags(args):
    if args.block_rows < 2:
        raise UsageError("--block-rows must be >= 2")
    if not args.max_damping > 0:
        raise UsageError("--max-damping must be > 0")


def _run_identify(args):
    _check_ssi_flags(args)
    if args.order < 1:
        raise UsageError("--order must be >= 1")
    rec = oma.read_record_csv(_read_text(args.record))
    cfg = oma.SsiConfig(block_rows=args.block_rows, model_order=args.order,
                        max_damping=args.max_damping)
    _, modes = oma.ssi_cov(rec, cfg)
    doc = {
        "report": "modal_identification",
        "block_rows": args.block_rows,
        "model_order": args.order,
        "channels": list(rec.channel_labels),
        "source": modes.source,
        "modes": _mode_dicts(modes),
    }
    _emit_report(doc, args.out)
    return 0


def _run_stabilize(args):
    _check_ssi_flags(args)
    if args.freq_tol < 0 or args.damping_tol < 0:
        raise UsageError("tolerances must be >= 0")
    if not 0.0 <= args.mac_min <= 1.0:
        raise UsageError("--mac-min must lie in [0, 1]")
    orders = _parse_orders(args.orders)
    rec = oma.read_record_csv(_read_text(args.record))
    diagram = oma.stabilization_sweep(
        rec, orders, args.block_rows,
        tolerances=(args.freq_tol, args.damping_tol, args.mac_min),
        max_damping=args.max_damping)
    doc = {
        "report": "stabilization",
        "block_rows": args.block_rows,
        "tolerances": {
            "freq_rel": args.freq_tol,
            "damping_rel": args.damping_tol,
            "mac_min": args.mac_min,
        },
        "orders": orders,
        "entries": [
            {"order": order, "frequency_hz": m.frequency,
             "damping_ratio": m.damping, "stable": stable}
            for order, m, stable in diagram.entries
        ],
        "errors": [
            {"order": order, "message": message}
            for order, message in diagram.errors
        ],
    }
    _emit_report(doc, args.out)
    return 0


def _run_match(args):
    if not 0.0 <= args.mac_min <= 1.0:
        raise UsageError("--mac-min must lie in [0, 1]")
    oma_set = oma.read_modal_set_json(_read_text(args.oma))
    fea_set = oma.read_modal_set_json(_read_text(args.fea))
    report = oma.match_modes(oma_set, fea_set, mac_min=args.mac_min)
    doc = {
        "report": "mode_match",
        "mac_min": args.mac_min,
        "pairs": [
            {
                "oma_frequency_hz": mo.frequency,
                "fea_frequency_hz": mf.frequency,
                "oma_damping_ratio": mo.damping,
                "fea_damping_ratio": mf.damping,
                "mac": value,
                "freq_diff_rel": diff,
            }
            for mo, mf, value, diff in report.pairs
        ],
        "unmatched_oma": [m.frequency for m in report.unmatched_oma],
        "unmatched_fea": [m.frequency for m in report.unmatched_fea],
    }
    _emit_report(doc, args.out)
    return 0


def _run_bind(args):
    if args.frame and (args.history is None or args.time is None):
        raise UsageError("--frame needs --history and --time")
    if args.scale < 0:
        raise UsageError("--scale must be >= 0")
    _parse_mask(args.axes)
    pc = pointcloud.load_ply(_read_bytes(args.cloud))
    model = deformation.read_fea_model_json(_read_text(args.model))
    binding = deformation.bind_points(pc, model)
    frame_data = None
    if args.frame:
        history = deformation.read_history_csv(_read_text(args.history))
        cfg = deformation.PlaybackConfig(scale=args.scale,
                                         axis_mask=_parse_mask(args.axes))
        frame = deformation.export_frame(pc, binding, history, args.time,
                                         cfg, model)
        frame_data = pointcloud.save_ply(frame, encoding="binary")
    doc = {
        "report": "binding",
        "points": len(pc),
        "node_ids": [int(v) for v in binding.node_ids],
    }
    _emit_report(doc, args.out)
    if frame_data is not None:
        _write_bytes(args.frame, frame_data)
    return 0


def _run_check(args):
    model = deformation.read_fea_model_json(_read_text(args.model))
    if args.span_in is not None:
        if not args.span_in > 0:
            raise UsageError("--span-in must be > 0")
        model = deformation.FeaModel(
            node_ids=model.node_ids, positions=model.positions,
            span_length_in=args.span_in, vertical_axis=model.vertical_axis,
            midspan_nodes=model.midspan_nodes)
    history = deformation.read_history_csv(_read_text(args.history))
    report = deformation.check_serviceability(history, model)
    doc = {
        "report": "serviceability",
        "span_length_in": model.span_length_in,
        "limit_in": report.limit_in,
        "nodes": [
            {"node_id": e.node_id, "peak_in": e.peak_in,
             "t_peak": e.t_peak, "violated": e.violated}
            for e in report.entries
        ],
        "violations": list(report.violations),
    }
    _emit_report(doc, args.out)
    return 1 if report.violations else 0


def _run_simulate(args):
    masses = _parse_floats(args.masses, "--masses")
    springs = _parse_floats(args.springs, "--springs")
    if args.zetas:
        zetas = _parse_floats(args.zetas, "--zetas")
    else:
        zetas = [0.0] * len(masses)
    if not args.dt > 0:
        raise UsageError("--dt must be > 0")
    if not args.duration > 0:
        raise UsageError("--duration must be > 0")
    if args.substeps < 1:
        raise UsageError("--substeps must be >= 1")
    if args.force_std < 0:
        raise UsageError("--force-std must be >= 0")
    mass, stiffness = oma.chain_matrices(masses, springs)
    damping = oma.modal_damping_matrix(mass, stiffness, zetas)
    n_steps = int(round(args.duration / args.dt))
    rng = np.random.default_rng(args.seed)
    excitation = args.force_std * rng.standard_normal(
        (len(masses), n_steps + 1))
    rec = oma.simulate_mdof(mass, stiffness, damping, excitation,
                            args.dt, args.duration, substeps=args.substeps)
    _write_text(args.output, oma.write_record_csv(rec))
    print("wrote %d channels x %d samples" % (rec.channels, rec.n_samples))
    return 0


def _run_serve(args):
    host, port = _parse_bind_addr(args.bind)
    if args.max_users < 1:
        raise UsageError("--max-users must be >= 1")
    if args.scan_buffer < 0:
        raise UsageError("--scan-buffer must be >= 0")

    def ready(bound_port):
        print("listening on %s:%d" % (host, bound_port), flush=True)

    try:
        asyncio.run(session_server.run_server(
            host, port, max_users=args.max_users,
            scan_buffer_points=args.scan_buffer, ready=ready))
    except KeyboardInterrupt:
        pass
    return 0


# ------------------------------------------------------------------- parsing

def build_parser():
    parser = argparse.ArgumentParser(
        prog="bridgeroom",
        description="Point cloud, modal identification, deformation "
                    "playback, and session tools.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("downsample",
                       help="voxel grid down-sampling of a PLY cloud")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--voxel", type=float, required=True,
                   help="voxel edge length, meters")
    p.add_argument("--anchor", help="grid anchor as x,y,z "
                                    "(default: cloud AABB minimum)")
    p.add_argument("--encoding", choices=("binary", "ascii"),
                   default="binary")
    p.set_defaults(func=_run_downsample)

    p = sub.add_parser("identify",
                       help="covariance-driven subspace identification")
    p.add_argument("record", help="vibration record CSV")
    p.add_argument("--order", type=int, required=True, help="model order")
    p.add_argument("--block-rows", type=int, required=True,
                   help="Toeplitz half-depth")
    p.add_argument("--max-damping", type=float, default=0.20)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=_run_identify)

    p = sub.add_parser("stabilize", help="stabilization sweep over orders")
    p.add_argument("record")
    p.add_argument("--orders", required=True,
                   help="start:stop[:step] or comma list")
    p.add_argument("--block-rows", type=int, required=True)
    p.add_argument("--freq-tol", type=float, default=0.01)
    p.add_argument("--damping-tol", type=float, default=0.05)
    p.add_argument("--mac-min", type=float, default=0.98)
    p.add_argument("--max-damping", type=float, default=0.20)
    p.add_argument("--out")
    p.set_defaults(func=_run_stabilize)

    p = sub.add_parser("match", help="pair measured and model modes by MAC")
    p.add_argument("oma", help="measured modal set JSON")
    p.add_argument("fea", help="model modal set JSON")
    p.add_argument("--mac-min", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=_run_match)

    p = sub.add_parser("bind",
                       help="bind cloud points to their nearest model nodes")
    p.add_argument("cloud", help="PLY cloud")
    p.add_argument("model", help="model JSON")
    p.add_argument("--out", help="write the binding report here")
    p.add_argument("--frame", help="write a deformed, colored PLY frame")
    p.add_argument("--history", help="displacement history CSV "
                                     "(needed for --frame)")
    p.add_argument("--time", type=float, help="frame instant, seconds")
    p.add_argument("--scale", type=float, default=1.0,
                   help="frame displacement exaggeration")
    p.add_argument("--axes", default="1,1,1",
                   help="frame axis mask as three 0/1 flags")
    p.set_defaults(func=_run_bind)

    p = sub.add_parser("check",
                       help="serviceability check against span/1000")
    p.add_argument("model", help="model JSON")
    p.add_argument("history", help="displacement history CSV")
    p.add_argument("--span-in", type=float,
                   help="override the model span, inches")
    p.add_argument("--out")
    p.set_defaults(func=_run_check)

    p = sub.add_parser("simulate",
                       help="white-noise response of a spring chain")
    p.add_argument("output", help="record CSV to write")
    p.add_argument("--masses", required=True, help="comma list, kg")
    p.add_argument("--springs", required=True,
                   help="comma list, N/m; first ties to ground")
    p.add_argument("--zetas", help="modal damping ratios (default 0)")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-std", type=float, default=1.0)
    p.add_argument("--substeps", type=int, default=5,
                   help="internal integration refinement per output step")
    p.set_defaults(func=_run_simulate)

    p = sub.add_parser("serve", help="run the collaboration server")
    p.add_argument("--bind", default="127.0.0.1:8765", help="addr:port")
    p.add_argument("--max-users", type=int, default=20)
    p.add_argument("--scan-buffer", type=int, default=500000,
                   help="scan buffer cap, total points")
    p.set_defaults(func=_run_serve)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 2
    except (BridgeroomError, ValueError, KeyError, OSError) as exc:
        name = type(exc).__name__
        print("error: %s: %s" % (name, exc), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
