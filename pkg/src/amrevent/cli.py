"""Command-line pipeline driver.

    amrevent preprocess --in raw.penman --out corpus.jsonl
    amrevent pretrain --mode semantic  --corpus corpus.jsonl --config sem.json --out sem.ckpt
    amrevent pretrain --mode structure --corpus corpus.jsonl --config str.json \
        --text-checkpoint sem.ckpt --out str.ckpt
    amrevent cluster --corpus corpus.jsonl --checkpoints sem.ckpt str.ckpt \
        --config cluster.json --out clusters.json
    amrevent evaluate --pred clusters.json --gold gold.jsonl --role triggers
    amrevent finetune --train train.jsonl --dev dev.jsonl \
        --checkpoints sem.ckpt str.ckpt --config ft.json --out model.ckpt

Every training or report command writes its delimited output (CSV or
JSON) plus a rendered PNG figure alongside, and a .meta.json sidecar
with the run configuration. Reruns with the same seed produce byte
identical checkpoints, CSVs and JSON. The environment variable
AMREVENT_SEED overrides the configured seed.

Exit codes: 0 success, 1 usage or config error, 2 data validation
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import persistence, plots
from .autodiff import Tensor
from .clustering import ClusteringConfig
from .downstream import (
    ClassifierHead,
    FinetuneConfig,
    finetune,
    liberal_pipeline,
    read_instances_jsonl,
)
from .errors import (
    CheckpointError,
    ConfigError,
    NumericError,
    ParseError,
    ValidationError,
)
from .evaluation import GoldLabeling, b_cubed
from .graph import merge_entity_nodes, read_corpus_jsonl, write_corpus_jsonl
from .graph_encoder import EdgeLabelVocab, GraphEncoderConfig, GraphEncoderParams
from .penman import read_penman_file
from .semantic import BilinearScorer, SemanticTrainConfig, train_semantic
from .structure import StructureTrainConfig, train_structure
from .text_encoder import EncoderConfig, EncoderParams, Vocabulary

SEED_ENV_VAR = "AMREVENT_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- config files --------------------------------------------------------


def _load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from exc


def _check_keys(obj: dict, allowed: set[str], context: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown config key(s) at {context}: {sorted(unknown)}")


def _adam_kwargs(obj: dict, context: str) -> dict:
    _check_keys(obj, {"eps", "beta1", "beta2"}, context)
    out = {}
    if "eps" in obj:
        out["adam_eps"] = float(obj["eps"])
    if "beta1" in obj:
        out["adam_beta1"] = float(obj["beta1"])
    if "beta2" in obj:
        out["adam_beta2"] = float(obj["beta2"])
    return out


def _encoder_config(obj: dict, context: str) -> EncoderConfig:
    _check_keys(
        obj, {"layers", "dim", "heads", "ff_dim", "max_len", "marker_pairs", "residual"}, context
    )
    return EncoderConfig(**obj)


def _seed_override(seed: int) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    return int(env) if env else seed


def semantic_config_from_json(obj: dict) -> SemanticTrainConfig:
    _check_keys(
        obj,
        {"batch_size", "lr", "m_t", "m_a", "max_seq_len", "adam", "seed", "steps",
         "eval_every", "encoder", "corpus"},
        "semantic config",
    )
    kwargs = {}
    for key, dest in (("batch_size", "batch_size"), ("lr", "learning_rate"),
                      ("m_t", "m_t"), ("m_a", "m_a"), ("max_seq_len", "max_seq_len"),
                      ("seed", "seed"), ("steps", "steps"), ("eval_every", "eval_every")):
        if key in obj:
            kwargs[dest] = obj[key]
    kwargs.update(_adam_kwargs(obj.get("adam", {}), "semantic config: adam"))
    kwargs["encoder"] = _encoder_config(obj.get("encoder", {}), "semantic config: encoder")
    cfg = SemanticTrainConfig(**kwargs)
    cfg.seed = _seed_override(cfg.seed)
    return cfg


def structure_config_from_json(obj: dict) -> StructureTrainConfig:
    _check_keys(
        obj,
        {"batch_size", "restart_probability", "temperature", "warmup_steps", "weight_decay",
         "training_steps", "learning_rate", "adam", "layers", "dropout", "hidden_dim",
         "max_walk_steps", "seed", "corpus"},
        "structure config",
    )
    kwargs = {k: obj[k] for k in
              ("batch_size", "restart_probability", "temperature", "warmup_steps",
               "weight_decay", "training_steps", "learning_rate", "layers", "dropout",
               "hidden_dim", "max_walk_steps", "seed") if k in obj}
    kwargs.update(_adam_kwargs(obj.get("adam", {}), "structure config: adam"))
    cfg = StructureTrainConfig(**kwargs)
    cfg.seed = _seed_override(cfg.seed)
    return cfg


def clustering_config_from_json(obj: dict, n_threads: int) -> ClusteringConfig:
    _check_keys(
        obj,
        {"k_t_min", "k_t_max", "k_a_min", "k_a_max", "lambda", "max_iterations", "seed",
         "kmeans_restarts", "kmeans_iters", "use_structure"},
        "clustering config",
    )
    required = {"k_t_min", "k_t_max", "k_a_min", "k_a_max"}
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"clustering config is missing {sorted(missing)}")
    cfg = ClusteringConfig(
        k_t_range=(int(obj["k_t_min"]), int(obj["k_t_max"])),
        k_a_range=(int(obj["k_a_min"]), int(obj["k_a_max"])),
        lam=float(obj.get("lambda", 0.5)),
        max_iterations=int(obj.get("max_iterations", 10)),
        seed=int(obj.get("seed", 0)),
        kmeans_restarts=int(obj.get("kmeans_restarts", 5)),
        kmeans_iters=int(obj.get("kmeans_iters", 100)),
        use_structure=bool(obj.get("use_structure", True)),
        threads=n_threads,
    )
    cfg.seed = _seed_override(cfg.seed)
    return cfg


def finetune_config_from_json(obj: dict) -> FinetuneConfig:
    _check_keys(
        obj,
        {"batch_size", "epochs", "lr", "adam", "max_seq_len", "hidden_dim", "seed",
         "feature_mode"},
        "finetune config",
    )
    kwargs = {}
    for key, dest in (("batch_size", "batch_size"), ("epochs", "epochs"),
                      ("lr", "learning_rate"), ("max_seq_len", "max_seq_len"),
                      ("hidden_dim", "hidden_dim"), ("seed", "seed"),
                      ("feature_mode", "feature_mode")):
        if key in obj:
            kwargs[dest] = obj[key]
    kwargs.update(_adam_kwargs(obj.get("adam", {}), "finetune config: adam"))
    cfg = FinetuneConfig(**kwargs)
    cfg.seed = _seed_override(cfg.seed)
    return cfg


# -- checkpoint bundles ---------------------------------------------------


@dataclass
class Bundle:
    text_params: Optional[EncoderParams] = None
    scorer: Optional[BilinearScorer] = None
    graph_params: Optional[GraphEncoderParams] = None
    head: Optional[ClassifierHead] = None
    head_labels: Optional[list[str]] = None


def save_bundle(path, text_params=None, scorer=None, graph_params=None,
                head=None, extra_meta=None) -> None:
    """One checkpoint file holding any subset of the parameter groups,
    namespaced text. / scorer. / gin. / head., plus vocabulary and
    edge-label sidecar files and a metadata sidecar."""
    tensors: dict[str, np.ndarray] = {}
    meta: dict = {}
    if text_params is not None:
        for name, t in text_params.named_tensors().items():
            tensors[f"text.{name}"] = t.data
        tensors["text.feature_center"] = text_params.feature_center
        cfg = text_params.config
        meta["encoder_config"] = {
            "layers": cfg.layers, "dim": cfg.dim, "heads": cfg.heads, "ff_dim": cfg.ff_dim,
            "max_len": cfg.max_len, "marker_pairs": cfg.marker_pairs, "residual": cfg.residual,
        }
        text_params.vocab.save(f"{path}.vocab")
    if scorer is not None:
        tensors["scorer.W"] = scorer.W.data
    if graph_params is not None:
        for name, t in graph_params.named_tensors().items():
            tensors[f"gin.{name}"] = t.data
        gcfg = graph_params.config
        meta["graph_config"] = {
            "layers": gcfg.layers, "hidden_dim": gcfg.hidden_dim,
            "in_dim": gcfg.in_dim, "dropout": gcfg.dropout,
        }
        graph_params.edge_labels.save(f"{path}.rels")
    if head is not None:
        for name, t in head.named_tensors().items():
            tensors[f"head.{name}"] = t.data
        meta["head_classes"] = head.n_classes
    if extra_meta:
        meta.update(extra_meta)
    persistence.save(tensors, path)
    persistence.write_metadata(path, meta)


def load_bundle(paths) -> Bundle:
    """Merge one or more checkpoint files into a Bundle. Duplicate
    tensor names across files are an error."""
    tensors: dict[str, np.ndarray] = {}
    meta: dict = {}
    vocab = None
    rels = None
    for path in paths:
        loaded = persistence.load(path)
        overlap = set(loaded) & set(tensors)
        if overlap:
            raise ValidationError(f"duplicate tensors across checkpoints: {sorted(overlap)}")
        tensors.update(loaded)
        try:
            meta.update(persistence.read_metadata(path))
        except FileNotFoundError:
            pass
        if os.path.exists(f"{path}.vocab"):
            vocab = Vocabulary.load(f"{path}.vocab")
        if os.path.exists(f"{path}.rels"):
            rels = EdgeLabelVocab.load(f"{path}.rels")

    bundle = Bundle()
    text_names = {k[len("text."):]: v for k, v in tensors.items() if k.startswith("text.")}
    if text_names:
        if vocab is None or "encoder_config" not in meta:
            raise ValidationError("text checkpoint needs its .vocab and .meta.json sidecars")
        cfg = EncoderConfig(**meta["encoder_config"])
        params = EncoderParams.zeros(cfg, vocab)
        center = text_names.pop("feature_center", None)
        params.load_arrays(text_names)
        if center is not None:
            params.feature_center = center.astype(np.float32)
        bundle.text_params = params
    if "scorer.W" in tensors:
        bundle.scorer = BilinearScorer(Tensor(tensors["scorer.W"].copy(), requires_grad=True))
    gin_names = {k[len("gin."):]: v for k, v in tensors.items() if k.startswith("gin.")}
    if gin_names:
        if rels is None or "graph_config" not in meta:
            raise ValidationError("graph checkpoint needs its .rels and .meta.json sidecars")
        gcfg = GraphEncoderConfig(**meta["graph_config"])
        gp = GraphEncoderParams.zeros(gcfg, rels)
        gp.load_arrays(gin_names)
        bundle.graph_params = gp
    head_names = {k[len("head."):]: v for k, v in tensors.items() if k.startswith("head.")}
    if head_names:
        bundle.head = ClassifierHead(
            {k: Tensor(v.copy(), requires_grad=True) for k, v in head_names.items()},
            int(meta.get("head_classes", head_names["b2"].shape[0])),
        )
        bundle.head_labels = meta.get("head_labels")
    return bundle


# -- output helpers --------------------------------------------------------


def _write_loss_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("step,train_loss,val_loss\n")
        for row in rows:
            step, train = row[0], row[1]
            val = row[2] if len(row) > 2 else None
            fh.write(f"{step},{train!r},{'' if val is None else repr(val)}\n")


def _write_f1_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,train_loss,val_f1\n")
        for epoch, loss, f1 in rows:
            fh.write(f"{epoch},{loss!r},{f1!r}\n")


def _stem(path: str) -> str:
    root, ext = os.path.splitext(path)
    return root if ext else path


# -- commands --------------------------------------------------------------


def cmd_preprocess(args) -> int:
    fmt = args.format
    if fmt == "auto":
        with open(args.infile, "r", encoding="utf-8") as fh:
            head = fh.read(4096).lstrip()
        fmt = "jsonl" if head.startswith("{") else "penman"
    graphs = read_corpus_jsonl(args.infile) if fmt == "jsonl" else read_penman_file(args.infile)
    merged = [merge_entity_nodes(g) for g in graphs]
    write_corpus_jsonl(merged, args.out)
    n_nodes = sum(len(g.nodes) for g in merged)
    n_edges = sum(len(g.edges) for g in merged)
    n_merged = sum(1 for g in merged for n in g.nodes if n.merged_from)
    print(f"sentences: {len(merged)}")
    print(f"nodes: {n_nodes}")
    print(f"edges: {n_edges}")
    if args.stats:
        print(f"merged nodes: {n_merged}")
    return 0


def cmd_pretrain(args) -> int:
    obj = _load_json(args.config)
    corpus_path = args.corpus or obj.get("corpus")
    if not corpus_path:
        raise ConfigError("no corpus: pass --corpus or set 'corpus' in the config")
    corpus = read_corpus_jsonl(corpus_path)
    loss_log = args.loss_log or f"{_stem(args.out)}.loss.csv"

    if args.mode == "semantic":
        cfg = semantic_config_from_json(obj)
        params, scorer, trace = train_semantic(corpus, cfg)
        save_bundle(args.out, text_params=params, scorer=scorer,
                    extra_meta={"seed": cfg.seed, "mode": "semantic"})
        _write_loss_csv(trace, loss_log)
        plots.render_loss_curve(trace, f"{_stem(loss_log)}.png", "semantic pre-training")
    else:
        if not args.text_checkpoint:
            raise ConfigError(
                "--mode structure needs --text-checkpoint (node features come from the text encoder)"
            )
        cfg = structure_config_from_json(obj)
        bundle = load_bundle([args.text_checkpoint])
        if bundle.text_params is None:
            raise ValidationError(f"{args.text_checkpoint} holds no text encoder")
        params, trace = train_structure(corpus, bundle.text_params, cfg)
        save_bundle(args.out, graph_params=params,
                    extra_meta={"seed": cfg.seed, "mode": "structure",
                                "text_checkpoint": os.path.basename(args.text_checkpoint)})
        _write_loss_csv(trace, loss_log)
        plots.render_loss_curve(trace, f"{_stem(loss_log)}.png", "structure pre-training")
    print(f"checkpoint written to {args.out}")
    return 0


def cmd_cluster(args) -> int:
    obj = _load_json(args.config)
    config = clustering_config_from_json(obj, args.threads)
    if args.ablate == "structure":
        config.use_structure = False
    corpus = read_corpus_jsonl(args.corpus)
    bundle = load_bundle(args.checkpoints)
    if bundle.text_params is None:
        raise ValidationError("clustering needs a semantic checkpoint (text encoder)")
    if config.use_structure and bundle.graph_params is None:
        raise ValidationError(
            "clustering with structure needs a graph-encoder checkpoint (or use --ablate structure)"
        )
    result = liberal_pipeline(corpus, bundle.text_params, bundle.graph_params, config)

    out_obj = {
        "K_T": result.clustering.k_t,
        "K_A": result.clustering.k_a,
        "O": result.clustering.o_min,
        "triggers": {k: int(v) for k, v in sorted(result.clustering.triggers.assignment.items())},
        "arguments": {k: int(v) for k, v in sorted(result.clustering.arguments.assignment.items())},
    }
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(out_obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
    stem = _stem(args.out)
    for name, schema in (("triggers", result.trigger_schema), ("arguments", result.argument_schema)):
        with open(f"{stem}.{name}.schema.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"clusters": schema}, fh, indent=2)
            fh.write("\n")
    trig_sizes = np.bincount(list(out_obj["triggers"].values()), minlength=result.clustering.k_t)
    arg_sizes = np.bincount(list(out_obj["arguments"].values()), minlength=result.clustering.k_a)
    plots.render_cluster_report(trig_sizes, arg_sizes, result.clustering.o_min, f"{stem}.png")
    persistence.write_metadata(args.out, {"seed": config.seed, "ablate": args.ablate})
    print(f"clusters written to {args.out} (O = {result.clustering.o_min:.6f})")
    return 0


def cmd_evaluate(args) -> int:
    with open(args.pred, "r", encoding="utf-8") as fh:
        pred_obj = json.load(fh)
    if "triggers" in pred_obj or "arguments" in pred_obj:
        if args.role not in pred_obj:
            raise ValidationError(f"prediction file has no {args.role!r} section")
        pred_map = pred_obj[args.role]
    else:
        pred_map = pred_obj
    gold: dict = {}
    with open(args.gold, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                gold[str(obj["id"])] = str(obj["label"])
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(f"bad gold line: {exc}", line=line_no) from exc
    precision, recall, f1 = b_cubed(pred_map, GoldLabeling(gold))
    metrics = {
        "b3_precision": precision,
        "b3_recall": recall,
        "b3_f1": f1,
        "n_items": len(gold),
    }
    sys.stdout.write(json.dumps(metrics) + "\n")
    return 0


def cmd_finetune(args) -> int:
    obj = _load_json(args.config)
    config = finetune_config_from_json(obj)
    train_instances = read_instances_jsonl(args.train)
    dev_instances = read_instances_jsonl(args.dev)
    bundle = load_bundle(args.checkpoints)
    if bundle.text_params is None or bundle.graph_params is None:
        raise ValidationError("fine-tuning needs both a semantic and a structure checkpoint")
    head, labels, history = finetune(
        train_instances, dev_instances, bundle.text_params, bundle.graph_params, config
    )
    save_bundle(args.out, text_params=bundle.text_params, graph_params=bundle.graph_params,
                head=head, extra_meta={"seed": config.seed, "head_labels": labels,
                                       "feature_mode": config.feature_mode})
    f1_log = args.f1_log or f"{_stem(args.out)}.f1.csv"
    _write_f1_csv(history, f1_log)
    plots.render_f1_curve(history, f"{_stem(f1_log)}.png")
    best_epoch = max(history, key=lambda r: r[2])[0]
    print(f"model written to {args.out} (best epoch {best_epoch})")
    return 0


def cmd_demo_data(args) -> int:
    from .synth import (
        SyntheticSpec,
        generate_liberal_corpus,
        generate_supervised_instances,
        split_train_val,
    )
    from .downstream import write_instances_jsonl

    os.makedirs(args.out_dir, exist_ok=True)
    spec = SyntheticSpec(n_sentences=args.sentences, seed=args.seed)
    graphs, gold_t, gold_a = generate_liberal_corpus(spec)
    write_corpus_jsonl(graphs, os.path.join(args.out_dir, "corpus.jsonl"))
    for name, gold in (("gold_triggers.jsonl", gold_t), ("gold_arguments.jsonl", gold_a)):
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            for item, label in sorted(gold.items()):
                fh.write(json.dumps({"id": item, "label": label}) + "\n")
    instances = generate_supervised_instances(
        SyntheticSpec(n_sentences=args.instances, seed=spec.seed + 1)
    )
    train, dev = split_train_val(instances, 0.2, spec.seed)
    write_instances_jsonl(train, os.path.join(args.out_dir, "instances_train.jsonl"))
    write_instances_jsonl(dev, os.path.join(args.out_dir, "instances_dev.jsonl"))

    configs = {
        "semantic.json": {
            "batch_size": 8, "lr": 0.002, "m_t": 9, "m_a": 30, "max_seq_len": 64,
            "steps": 300, "seed": 7,
            "encoder": {"layers": 2, "dim": 64, "heads": 4, "max_len": 64},
        },
        "structure.json": {
            "batch_size": 8, "restart_probability": 0.8, "temperature": 0.07,
            "warmup_steps": 30, "weight_decay": 1e-5, "training_steps": 300,
            "learning_rate": 0.003, "layers": 3, "dropout": 0.1, "hidden_dim": 64,
            "seed": 7,
        },
        "cluster.json": {
            "k_t_min": 4, "k_t_max": 4, "k_a_min": 3, "k_a_max": 3,
            "lambda": 0.5, "seed": 7,
        },
        "finetune.json": {
            "batch_size": 20, "epochs": 8, "lr": 0.002, "max_seq_len": 64, "seed": 7,
        },
    }
    for name, cfg in configs.items():
        with open(os.path.join(args.out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(cfg, fh, indent=2)
            fh.write("\n")
    print(f"demo data written to {args.out_dir}")
    return 0


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="amrevent", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="ingest parser output, merge entities, write JSONL")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("auto", "penman", "jsonl"), default="auto")
    p.add_argument("--stats", action="store_true", help="also print merged-node count")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("pretrain", help="run one of the two pre-training objectives")
    p.add_argument("--mode", choices=("semantic", "structure"), required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--text-checkpoint", default=None,
                   help="semantic checkpoint supplying node features (structure mode)")
    p.add_argument("--loss-log", default=None, help="loss CSV path (default <out>.loss.csv)")
    p.set_defaults(func=cmd_pretrain)

    p = sub.add_parser("cluster", help="liberal event extraction by joint clustering")
    p.add_argument("--corpus", required=True)
    p.add_argument("--checkpoints", nargs="+", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ablate", choices=("structure",), default=None)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("evaluate", help="B-Cubed metrics of a prediction against gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--role", choices=("triggers", "arguments"), default="triggers")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("finetune", help="supervised adaptation of the pre-trained encoders")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--checkpoints", nargs="+", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--f1-log", default=None)
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("demo-data", help="generate a synthetic corpus and configs to try the pipeline")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sentences", type=int, default=300)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_demo_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, ValidationError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
