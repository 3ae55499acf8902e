"""Command line entry point: ``condorcet-morph VERB ...``.

Exit codes: 0 success, 2 configuration error, 3 data-format error,
4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import evaluation, sco, voting
from .errors import ConfigError, DataFormatError, LutLookupError, NumericError
from .experiment import load_config, palette_colors, rank_colors, resolve_ordering, run_experiment
from .imageio import load_cifar_batch, read_image, write_image
from .morphology import OPERATORS, StructuringElement, apply_operator
from .ordering import build_rank_lut, lex_mappings

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _range(text):
    a, sep, b = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("expected START:STOP")
    return int(a), int(b)


def _fmt(x) -> str:
    return format(float(x), ".10g")


def cmd_train(args):
    cfg = sco.SoftConfig(
        tau=args.tau, epochs=args.epochs, batch_size=args.batch_size,
        learning_rate=args.learning_rate, seed=args.seed,
    )
    train_imgs = load_cifar_batch(args.data, *args.train_range)
    val_imgs = load_cifar_batch(args.data, *args.val_range) if args.val_range else []

    def report(epoch, tr, val):
        logging.info("epoch %d train=%.6f val=%s", epoch, tr, "-" if val is None else f"{val:.6f}")

    result = sco.train(train_imgs, val_imgs, lex_mappings(), cfg, callback=report)
    sco.save_model(args.model, result.params, cfg)
    if args.loss_csv:
        sco.write_loss_csv(args.loss_csv, result)
    print(f"saved {args.model}; final train loss {_fmt(result.train_loss[-1]) if result.train_loss else '-'}")


def cmd_morph(args):
    se = StructuringElement.parse(args.se)
    h = resolve_ordering(args.order)
    img = read_image(args.inp)
    lut = build_rank_lut(h, img)
    write_image(args.out, apply_operator(args.op, img, h, se, lut=lut))
    if args.lut_csv:
        Path(args.lut_csv).write_text(lut.to_csv(), encoding="utf-8")


def cmd_vote(args):
    orders = voting.read_profile(args.profile)
    if args.rule == "borda":
        scores = voting.borda_scores(orders, exact=True)
        print("candidate,score")
        for i, s in enumerate(scores):
            print(f"{i},{s}")
        order = sorted(range(len(scores)), key=lambda i: (scores[i], i))
        print("order," + "<=".join(str(i) for i in order))
    elif args.rule == "kemeny-exact":
        delta = voting.margin_matrix_from_orders(orders)
        res = voting.exact_condorcet_order(delta, max_n=args.max_n)
        print("order," + "<=".join(str(i) for i in res.order))
        print(f"objective,{_fmt(res.objective)}")
    else:
        delta = voting.margin_matrix_from_orders(orders)
        for row in delta:
            print(",".join(_fmt(v) for v in row))


def _parse_colors(text):
    out = []
    for tok in text.split(";"):
        vals = [int(v) for v in tok.split(",")]
        if len(vals) != 3 or not all(0 <= v <= 255 for v in vals):
            raise ConfigError(f"bad color {tok!r}; expected R,G,B with 8-bit values")
        out.append(vals)
    return np.array(out, dtype=np.float64) / 255.0


def cmd_rank(args):
    h = resolve_ordering(args.order)
    if args.colors:
        colors = _parse_colors(args.colors)
        names = {tuple(c): ",".join(str(int(round(v * 255))) for v in c) for c in colors.tolist()}
    else:
        labels, colors = palette_colors()
        names = {tuple(c): n for n, c in zip(labels, colors.tolist())}
    ranked = rank_colors(h, colors)
    for pos, c in enumerate(ranked.tolist()):
        print(f"{pos},{names[tuple(c)]}")
    if args.out:
        write_image(args.out, ranked[None, :, :])


def cmd_irregularity(args):
    I = read_image(args.reference)
    J = read_image(args.processed)
    t = evaluation.irregularity_terms(I, J, args.max_colors)
    print("pixel_distance,transport,phi,quantized")
    print(f"{_fmt(t.pixel_distance)},{_fmt(t.transport)},{_fmt(t.phi)},{t.quantized}")


def cmd_compare(args):
    values = defaultdict(dict)
    with open(args.csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"image", "method", "phi"} <= set(reader.fieldnames):
            raise DataFormatError(f"{args.csv}: expected columns image,method,phi")
        for row in reader:
            values[row["method"]][row["image"]] = float(row["phi"])
    images = sorted(set.intersection(*(set(v) for v in values.values())))
    paired = {m: [v[i] for i in images] for m, v in values.items()}
    tests = evaluation.pairwise_wilcoxon(paired, args.alpha)
    print("method_a,method_b,statistic,pvalue,direction,significant")
    for t in tests:
        print(f"{t.method_a},{t.method_b},{_fmt(t.statistic)},{_fmt(t.pvalue)},{t.direction},{t.significant}")
    dot = evaluation.hasse_from_tests(tests, list(paired))
    if args.dot:
        Path(args.dot).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)


def cmd_experiment(args):
    overrides = {
        "dataset": args.data, "output": args.output, "seed": args.seed,
        "epochs": args.epochs, "batch_size": args.batch_size, "tau": args.tau,
        "train_range": args.train_range, "val_range": args.val_range, "se": args.se,
        "eval_images": args.eval_images,
    }
    cfg = load_config(args.config, overrides)
    out = run_experiment(cfg)
    print(f"artifacts written to {out}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="condorcet-morph", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    t = sub.add_parser("train", help="train the consensus mapping on CIFAR images")
    t.add_argument("--data", required=True, help="CIFAR-10 binary batch file")
    t.add_argument("--train-range", type=_range, default=(0, 100))
    t.add_argument("--val-range", type=_range, default=(100, 200))
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--batch-size", type=int, default=1024)
    t.add_argument("--tau", type=float, default=1.0)
    t.add_argument("--learning-rate", type=float, default=0.001)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--model", required=True, help="output model JSON")
    t.add_argument("--loss-csv")
    t.set_defaults(func=cmd_train)

    m = sub.add_parser("morph", help="apply a morphological operator")
    m.add_argument("--op", choices=sorted(OPERATORS), required=True)
    m.add_argument("--se", default="square:3", help="square:N, disk:R or cross:A")
    m.add_argument("--order", default="lex-rgb", help="lex-rgb|lex-gbr|lex-brg|borda|learned:PATH")
    m.add_argument("--in", dest="inp", required=True)
    m.add_argument("--out", required=True)
    m.add_argument("--lut-csv", help="also write the look-up table")
    m.set_defaults(func=cmd_morph)

    v = sub.add_parser("vote", help="aggregate a vote profile")
    v.add_argument("rule", choices=["borda", "kemeny-exact", "margins"])
    v.add_argument("--profile", required=True)
    v.add_argument("--max-n", type=int, default=voting.EXACT_MAX_N)
    v.set_defaults(func=cmd_vote)

    r = sub.add_parser("rank", help="sort colors by an ordering")
    r.add_argument("--order", default="lex-rgb")
    r.add_argument("--colors", help="'R,G,B;R,G,B;...' in 8-bit units (default: 16-color palette)")
    r.add_argument("--out", help="write the ramp as a 1xk image")
    r.set_defaults(func=cmd_rank)

    i = sub.add_parser("irregularity", help="global irregularity of a processed image")
    i.add_argument("--reference", required=True)
    i.add_argument("--processed", required=True)
    i.add_argument("--max-colors", type=int, default=4096)
    i.set_defaults(func=cmd_irregularity)

    c = sub.add_parser("compare", help="pairwise Wilcoxon tests and Hasse diagram")
    c.add_argument("--csv", required=True, help="image,method,phi table")
    c.add_argument("--alpha", type=float, default=0.01)
    c.add_argument("--dot", help="write the Hasse diagram here instead of stdout")
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("experiment", help="run the full protocol")
    e.add_argument("--config", help="INI file with [experiment] and [training] sections")
    e.add_argument("--data")
    e.add_argument("--output")
    e.add_argument("--seed", type=int)
    e.add_argument("--epochs", type=int)
    e.add_argument("--batch-size", type=int)
    e.add_argument("--tau", type=float)
    e.add_argument("--train-range")
    e.add_argument("--val-range")
    e.add_argument("--se")
    e.add_argument("--eval-images", type=int)
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, LutLookupError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
