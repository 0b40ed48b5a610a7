"""Class comment classification across Java, Python and Smalltalk."""
from ._util import DataError, Language, derive_seed
from .classifiers import C45Classifier, GaussianNaiveBayes, Model, RandomForest, predict, train
from .corpus import (
    LabeledSentence, Taxonomy, category_tasks, load_ground_truth, load_taxonomy, normalize,
    split_sentences,
)
from .evaluation import EvalReport, evaluate_cv, information_gain, prf, rank_features, stratified_folds
from .extraction import ClassComment, extract_java, extract_python, extract_smalltalk, scan_corpus
from .features_nlp import PatternFeatures, load_catalog, match_patterns
from .features_text import TextFeatures, build_tfidf, lovins_stem, remove_stopwords
from .matrix import FeatureMatrix, SentenceFeatures, build_matrix
from .sampling import allocate_proportional, quintile_strata, required_sample_size
from .stats import friedman_nemenyi

__version__ = "0.1.0"
