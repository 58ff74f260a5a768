"""Contrastive event representation learning and liberal event
extraction over AMR graphs: a text encoder trained by trigger-argument
pair discrimination, a graph encoder trained by subgraph
discrimination, and joint constraint clustering plus supervised heads
that put the two representations to work."""

from .graph import (
    AmrEdge,
    AmrGraph,
    AmrNode,
    NegativeSample,
    PairSet,
    core_relation,
    identify_candidates,
    merge_entity_nodes,
    positive_pairs,
    read_corpus_jsonl,
    sample_negatives,
    write_corpus_jsonl,
)
from .penman import read_penman
from .text_encoder import (
    EncodedSentence,
    EncoderConfig,
    EncoderParams,
    Vocabulary,
    encode,
    insert_markers,
    span_representation,
)
from .semantic import (
    BilinearScorer,
    SemanticTrainConfig,
    batch_loss,
    pair_loss,
    pair_score,
    train_semantic,
)
from .sampler import SubgraphSample, anonymize, induce, pick_ego, rwr, sample_positive_pair
from .graph_encoder import (
    GraphEncoderConfig,
    GraphEncoderParams,
    encode_graph,
    init_node_features,
    one_hop_embedding,
)
from .structure import StructureTrainConfig, build_structure_batch, infonce_loss, train_structure
from .clustering import (
    CandidateContext,
    ClusterAssignment,
    ClusteringConfig,
    argument_similarity,
    constraint_f,
    joint_cluster,
    objective_O,
    spectral_cluster,
    trigger_similarity,
)
from .evaluation import GoldLabeling, b_cubed
from .downstream import (
    ClassifierHead,
    FinetuneConfig,
    SupervisedInstance,
    classify,
    dynamic_multi_pooling,
    finetune,
    instance_embedding,
    liberal_pipeline,
)
from .persistence import load as load_checkpoint
from .persistence import save as save_checkpoint

__version__ = "0.1.0"
