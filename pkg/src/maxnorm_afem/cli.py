"""Command line driver: one adaptive or uniform run written as CSV.

Exit status is 0 on success, 1 for invalid flags and 2 when the linear
solver fails (the rows computed so far are kept).
"""
import argparse
import logging
import os
import sys

from .adaptivity import AdaptConfig, adapt_loop
from .assembly import StabilizationKind
from .estimator import EstimatorConfig
from .io import RecordWriter, write_mesh_text, write_rates, write_vtk
from .problems import PROBLEMS, get_problem
from .seminorms import BUBBLE_SCALES

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError("must be positive, got %s" % text)
        return v
    return conv


def _nonnegative(text):
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative, got %s" % text)
    return v


def _dof(text):
    return _positive(int)(str(int(float(text))))


def build_parser():
    p = _Parser(prog="maxnorm-afem", description=__doc__.splitlines()[0])
    p.add_argument("--problem", choices=sorted(PROBLEMS), default="u1")
    p.add_argument("--eps", type=_positive(float), default=1.0)
    p.add_argument("--stab", choices=("none", "supg", "cip"), default="none")
    p.add_argument("--refine", choices=("uniform", "adaptive"), default="adaptive")
    p.add_argument("--max-dof", type=_dof, default=10_000)
    p.add_argument("--kmax", type=_positive(int), default=4)
    p.add_argument("--n0", type=_positive(int), default=4, help="initial n x n grid")
    p.add_argument("--c-vol", type=_positive(float), default=0.0125)
    p.add_argument("--c-jump", type=_positive(float), default=0.03)
    p.add_argument("--c-cip", type=_nonnegative, default=0.01)
    p.add_argument("--supg-scale", type=_nonnegative, default=1.0)
    p.add_argument("--lin-tol", type=_positive(float), default=1e-10)
    p.add_argument("--sample-order", type=_positive(int), default=4)
    p.add_argument("--bubble", choices=sorted(BUBBLE_SCALES), default="unit",
                   help="bubble normalisation in the convective seminorm")
    p.add_argument("--eta-stop", type=_nonnegative, default=0.0,
                   help="also stop once eta_max falls below this value")
    p.add_argument("--out", default="run.csv", help="CSV path; rates go to <stem>_rates.csv")
    p.add_argument("--export-mesh-every", type=int, default=0, metavar="N",
                   help="write mesh + solution every N steps (0 = never)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args):
    if args.stab == "supg":
        stab = StabilizationKind.supg(args.supg_scale)
    elif args.stab == "cip":
        stab = StabilizationKind.cip(args.c_cip)
    else:
        stab = StabilizationKind.none()
    get_problem(args.problem, args.eps)         # validates eps range
    est = EstimatorConfig(c_vol=args.c_vol, c_jump=args.c_jump, sample_order=args.sample_order)
    return AdaptConfig(problem=args.problem, eps=args.eps, refine_mode=args.refine,
                       k_max=args.kmax, max_dof=args.max_dof, n0=args.n0, stab=stab,
                       estimator=est, lin_tol=args.lin_tol, eta_stop=args.eta_stop,
                       bubble=args.bubble)


def rates_path(out):
    stem, ext = os.path.splitext(out)
    return stem + "_rates" + (ext or ".csv")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except ValueError as err:
        parser.error(str(err))
    out_dir = os.path.dirname(os.path.abspath(args.out))
    if not os.path.isdir(out_dir):
        parser.error("output directory %s does not exist" % out_dir)
    stem = os.path.splitext(args.out)[0]

    with RecordWriter(args.out) as writer:
        def on_step(rec, mesh, u_h, report):
            writer.write(rec)
            n = args.export_mesh_every
            if n > 0 and rec.step % n == 0:
                write_mesh_text("%s_mesh%03d.txt" % (stem, rec.step), mesh, u_h.values)
                write_vtk("%s_mesh%03d.vtk" % (stem, rec.step), mesh,
                          point_data={"u_h": u_h.values}, cell_data={"eta": report.eta})

        result = adapt_loop(config, on_step=on_step)
    if len(result.records) >= 2:
        write_rates(rates_path(args.out), result.records)
    if result.error is not None:
        print("numerical failure: %s" % result.error, file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
