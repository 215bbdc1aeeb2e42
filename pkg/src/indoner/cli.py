"""Command line: ``indoner train | tag | eval``.

Exit status is 0 on success, 1 on runtime errors and 2 on usage errors.
Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from indoner import __version__
from indoner.corpus import CorpusError, read_conll, serialize_conll
from indoner.embeddings import EmbeddingFormatError, load_word2vec
from indoner.evaluation import report, score
from indoner.model import VARIANTS, CheckpointError, ModelConfig, load_model, save_model, tag_sentences
from indoner.training import TrainingDiverged, train

logger = logging.getLogger("indoner")

_DEFAULTS = ModelConfig()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indoner", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one of the four architectures")
    p.add_argument("--variant", choices=list(VARIANTS), default="crf-pos")
    p.add_argument("--train", required=True, help="training corpus (CoNLL, 3 columns)")
    p.add_argument("--dev", help="dev corpus; keeps the best-F1 epoch")
    p.add_argument("--emb", required=True, help="pretrained vectors, word2vec text format")
    p.add_argument("--out", required=True, help="checkpoint path to write")
    p.add_argument("--epochs", type=int, default=_DEFAULTS.epochs)
    p.add_argument("--lr", type=float, default=_DEFAULTS.learning_rate)
    p.add_argument("--clip", type=float, default=_DEFAULTS.clip_norm)
    p.add_argument("--seed", type=int, default=_DEFAULTS.seed)
    p.add_argument("--dropout", type=float, default=_DEFAULTS.dropout)
    p.add_argument("--char-dim", type=int, default=_DEFAULTS.char_dim)
    p.add_argument("--c2w-hidden", type=int, default=_DEFAULTS.c2w_hidden)
    p.add_argument("--pos-dim", type=int, default=_DEFAULTS.pos_dim)
    p.add_argument("--lstm-hidden", type=int, default=_DEFAULTS.lstm_hidden)
    p.add_argument("--fc-hidden", type=int, default=_DEFAULTS.fc_hidden)
    p.add_argument("--decode-mask", action="store_true", help="forbid illegal IOB paths when decoding")
    p.add_argument("--finetune-emb", action="store_true", help="update pretrained word vectors")
    p.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a file of SURFACE<TAB>POS lines")
    p.add_argument("--model", required=True)
    p.add_argument("--input", "--test", dest="input", required=True)
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--decode-mask", action="store_true", default=None,
                   help="force IOB-constrained Viterbi even if the model was trained without it")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="exact-match entity F1 of a prediction file")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--format", choices=("tsv", "text"), default="tsv")
    p.set_defaults(func=cmd_eval)
    return parser


def resolve_config(args) -> ModelConfig:
    return ModelConfig.for_variant(
        args.variant, seed=args.seed, learning_rate=args.lr, clip_norm=args.clip,
        epochs=args.epochs, dropout=args.dropout, char_dim=args.char_dim,
        c2w_hidden=args.c2w_hidden, pos_dim=args.pos_dim, lstm_hidden=args.lstm_hidden,
        fc_hidden=args.fc_hidden, decode_mask=args.decode_mask,
        finetune_word_emb=args.finetune_emb)


def cmd_train(args) -> int:
    if args.epochs < 0 or args.lr <= 0:
        raise UsageError("--epochs must be >= 0 and --lr > 0")
    vectors = load_word2vec(args.emb)
    config = resolve_config(args)
    config.word_dim = vectors.dim
    if args.dump_config:
        print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
        return 0
    corpus = read_conll(args.train)
    dev = read_conll(args.dev) if args.dev else None

    print("epoch\tloss\tdev_f1")

    def show(stats):
        f1 = "-" if stats.dev_f1 is None else f"{stats.dev_f1:.4f}"
        print(f"{stats.epoch}\t{stats.mean_loss:.4f}\t{f1}", flush=True)

    model, history = train(corpus, config, vectors, dev, on_epoch=show,
                           dump_path=args.out + ".diverged")
    save_model(model, args.out)
    best = next((e for e in history.epochs if e.epoch == history.best_epoch), None)
    if best is not None and best.dev_f1 is not None:
        print(f"# best epoch {best.epoch} dev_f1 {best.dev_f1:.4f}")
    print(f"# train token accuracy {history.final_train_accuracy:.4f}")
    print(f"# checkpoint {args.out}")
    return 0


def cmd_tag(args) -> int:
    model = load_model(args.model)
    if args.decode_mask:
        model.config.decode_mask = True
    sentences = read_conll(args.input, tagged=False)
    text = serialize_conll(tag_sentences(model, sentences))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    gold = read_conll(args.gold)
    pred = read_conll(args.pred, validate=False)
    if len(gold) != len(pred):
        raise ValueError(f"gold has {len(gold)} sentences, prediction has {len(pred)}; "
                         f"first divergence at sentence {_first_divergence(gold, pred)}")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.surfaces != p.surfaces:
            raise ValueError(f"sentence {i}: tokens differ between gold and prediction")
    sys.stdout.write(report(score(gold, pred), args.format))
    return 0


def _first_divergence(gold, pred) -> int:
    for i, (g, p) in enumerate(zip(gold, pred)):
        if g.surfaces != p.surfaces:
            return i
    return min(len(gold), len(pred))


class UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CorpusError, EmbeddingFormatError, CheckpointError, TrainingDiverged,
            ValueError, OSError) as exc:
        print(f"indoner: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
