"""protoedit: retrieve-then-edit open-domain response generation.

Retrieve a prototype context/response pair, turn the lexical differences
between the prototype context and the current context into an edit vector,
and decode a revised response with an edit-conditioned attentive GRU decoder.
"""

from .corpus import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    UNK_ID,
    Pair,
    Utterance,
    Vocab,
    build_vocab,
    decode,
    encode,
    load_pairs,
    load_vocab,
    save_pairs,
    save_vocab,
    tokenize,
)
from .decoding import BeamConfig, Hypothesis, beam_search, greedy_decode, score_sequence
from .editor import (
    EditSets,
    EditVector,
    Example,
    Hyperparams,
    ModelParams,
    compute_edit_sets,
    decoder_step,
    edit_vector,
    encode_prototype,
    encode_quadruple,
    init_params,
    loss_and_grads,
    nll,
)
from .matcher import MatcherHyperparams, MatcherParams, match_score, rerank, train_matcher
from .metrics import (
    MetricReport,
    distinct_n,
    embedding_average,
    embedding_extrema,
    embedding_greedy,
    evaluate_suite,
    originality,
)
from .pipeline import EditTrace, PipelineConfig, PipelineEngine, validate_trace
from .retrieval import (
    InvertedIndex,
    Quadruple,
    RetrievalHit,
    build_index,
    build_training_quadruples,
    jaccard,
    search,
    select_prototypes_for_inference,
)
from .training import TrainResult, train
from .wordvecs import load_word_vectors, save_word_vectors, train_word_vectors

__version__ = "0.1.0"
