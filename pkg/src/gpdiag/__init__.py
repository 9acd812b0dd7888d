"""Probabilistic bearing-fault diagnosis toolkit.

Vibration windows from one or two accelerometer channels are reduced to
compact feature vectors -- kernel PCA with a selectable kernel, or a
two-stage stacked autoencoder, fitted per channel and fused at feature
level -- and classified by a pool of binary Gaussian process classifiers
arranged one-against-all.  Each prediction is a per-class posterior-mean
probability, not just a label.  An evaluation harness provides stratified
cross-validation, a grid search over the feature-extraction method pool,
and noise-robustness sweeps; the ``gpdiag`` CLI wires it all together.
"""

from ._backend import backend_name
from .covariance import COV_KINDS, CovarianceSpec, cov_eval, cov_matrix
from .evaluation import (ConfusionMatrix, CvConfig, CvResult, GridSearchResult,
                         MisclassRecord, NoiseLevelResult, RunResult,
                         confusion_matrix, grid_search, noise_sweep,
                         run_pipeline, stratified_cv)
from .exceptions import NumericalError
from .extraction import (ALL_METHODS, METHOD_POOL, ExtractorConfig,
                         FeatureExtractor, extract_features)
from .kernels import (KERNEL_KINDS, KernelSpec, center_gram, kernel_eval,
                      kernel_matrix, median_pairwise_distance)
from .kpca import KpcaModel, kpca_fit, kpca_project, kpca_transform
from .laplace import (BinaryGpcModel, LaplacePosterior, MeanSpec, laplace_fit,
                      log_marginal_likelihood)
from .likelihoods import (LIKELIHOOD_KINDS, LikelihoodSpec, likelihood_eval,
                          log_likelihood_terms, predictive_from_latent)
from .multiclass import (ClassProbabilities, OvrEnsemble, ovr_predict,
                         ovr_train, predict_batch)
from .optimize import GpcConfig, optimize_hyperparams
from .sae import (AutoencoderWeights, SaeModel, SaeSpec, ae_encode, ae_fit,
                  reconstruction_loss_and_grads, sae_fit)
from .signals import (FaultDataset, SegmentedSample, SynthSpec,
                      VibrationRecord, dataset_from_manifest, fuse_channels,
                      inject_noise, load_manifest, load_record,
                      render_impulse_signal, segment_record, stratified_split,
                      synth_dataset)

__version__ = "0.1.0"
