// Token attention, measure-theoretic attention (unmasked and causal
// masked), context-free MLP maps, and the in-context composition rule.
//
// The core API is (measure, query) -> vector: an attention layer both maps
// a query point and pushes the whole context forward through its own
// in-context map. Batch evaluation shares the pushed-forward measure across
// queries, which is what the composition semantics require.
//
// All exponential sums are computed with max-subtraction, and summation
// over particles follows a canonical content-based order, so outputs are
// bitwise independent of particle storage order.

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "ictx/measure.hpp"

namespace ictx {

/// One attention head: K, Q are k x d_in, V is d_head x d_in.
struct HeadParams {
  Mat K;
  Mat Q;
  Mat V;
};

/// Multi-head attention layer with residual connection. Each head carries
/// its combination matrix W (d_in x d_head).
struct MultiHeadParams {
  struct Head {
    Mat W;
    HeadParams params;
  };
  std::vector<Head> heads;
  int d_in = 0;
  int d_head = 0;
  int k = 0;

  int num_heads() const { return static_cast<int>(heads.size()); }
  void validate() const;
};

enum class Activation : std::uint8_t { relu, identity };

/// Feed-forward map applied to each token independently.
struct MlpParams {
  struct Layer {
    Mat W;
    Vec b;
    Activation act = Activation::identity;
  };
  std::vector<Layer> layers;
  int in_dim = 0;
  int out_dim = 0;

  void validate() const;
  static MlpParams affine(Mat W, Vec b);
};

/// Attention layer inside a stack; `masked` selects causal semantics.
struct AttentionLayer {
  MultiHeadParams params;
  bool masked = false;
};

using Layer = std::variant<AttentionLayer, MlpParams>;

/// Ordered alternation of attention layers and context-free maps,
/// evaluated with the in-context composition rule. Masked flags must be
/// homogeneous across the stack.
struct LayerStack {
  std::vector<Layer> layers;

  bool masked() const;
  int input_dim() const;
  int output_dim() const;
  std::size_t attention_count() const;
  void validate() const;
};

// --- token-matrix route (classical definition) -------------------------

/// Single-head attention on a token matrix X (tokens are columns).
Mat att_tokens(const HeadParams& theta, const Mat& X, bool masked, int k_dim);

/// Residual multi-head attention: X + sum_h W^h Att_h(X).
Mat matt_tokens(const MultiHeadParams& theta, const Mat& X, bool masked);

// --- measure route ------------------------------------------------------

/// Unmasked in-context attention value at a query point.
Vec gamma_unmasked(const MultiHeadParams& theta, const ParticleMeasure& mu,
                   const Vec& x);

/// Masked in-context attention: only particles with time <= t participate.
/// Throws "causal window empty" when the window carries no mass.
Vec gamma_masked(const MultiHeadParams& theta, const SpaceTimeMeasure& mu,
                 const Vec& x, double t);

/// Feed-forward evaluation of a context-free map.
Vec context_free(const MlpParams& xi, const Vec& x);

/// Left fold of the composition rule for a single query.
Vec compose_unmasked(const LayerStack& stack, const ParticleMeasure& mu,
                     const Vec& x);

/// Masked composition: the push-forward acts in space, particle times are
/// kept, and the query keeps its time t throughout.
Vec compose_masked(const LayerStack& stack, const SpaceTimeMeasure& mu,
                   const Vec& x, double t);

/// Batch evaluation at every particle of the context; the pushed-forward
/// measure is computed once per layer and shared by all queries.
struct UnmaskedBatch {
  std::vector<Vec> outputs;      // one per input particle
  ParticleMeasure final_measure; // context after the full stack
};
UnmaskedBatch compose_unmasked_batch(const LayerStack& stack,
                                     const ParticleMeasure& mu);

struct MaskedBatch {
  std::vector<Vec> outputs;
  SpaceTimeMeasure final_measure;
};
MaskedBatch compose_masked_batch(const LayerStack& stack,
                                 const SpaceTimeMeasure& mu);

/// Softmax weights of one head at a query (diagnostic; canonical particle
/// order). Nonnegative, sums to 1.
std::vector<double> attention_weights(const HeadParams& theta, int k_dim,
                                      const ParticleMeasure& mu, const Vec& x);

}  // namespace ictx
