#ifndef OSDA_DATASET_HPP
#define OSDA_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "osda/common.hpp"

namespace osda {

/// Reserved label token for samples of the unknown class.
inline constexpr const char* kUnknownLabel = "__unknown__";

enum class Role { Source, Target };

/// The class set: shared classes in a fixed order plus the distinguished
/// unknown class, which always sorts last.
struct ClassCatalog {
  std::vector<std::string> shared_classes;
  std::string unknown_id = kUnknownLabel;

  std::size_t size() const { return shared_classes.size() + 1; }
  std::size_t unknown_index() const { return shared_classes.size(); }

  /// Index of a label in catalog order (unknown last). Throws LabelError for
  /// labels outside the catalog.
  std::size_t index_of(const std::string& label) const;
  bool contains(const std::string& label) const;
  bool is_shared(const std::string& label) const;
  const std::string& label_of(std::size_t index) const;

  /// Catalog over the sorted distinct non-unknown labels of `labels`.
  static ClassCatalog from_labels(const std::vector<std::string>& labels);
};

/// A feature dataset: one sample per column of `features` (D x N), with an id
/// and an optional label per sample ("" = unlabeled). Immutable by
/// convention once built.
struct Dataset {
  Eigen::MatrixXd features;         // D x N, column j = sample j
  std::vector<std::string> ids;     // size N
  std::vector<std::string> labels;  // size N, "" for unlabeled
  Role role = Role::Source;

  Eigen::Index dim() const { return features.rows(); }
  std::size_t size() const { return static_cast<std::size_t>(features.cols()); }
  bool is_labeled(std::size_t i) const { return !labels[i].empty(); }

  /// Indices of samples labeled `label`, in row order.
  std::vector<std::size_t> indices_of(const std::string& label) const;

  /// Check the type invariants: finite entries, consistent sizes, source
  /// fully labeled. With a catalog, also that every label is in it.
  void validate(const ClassCatalog* catalog = nullptr) const;
};

/// One mean per class, in catalog order. Only classes that actually occur in
/// the source are listed; for open-set sources that includes the unknown
/// class (last).
struct MeanTable {
  Eigen::MatrixXd means;                 // D x |classes|
  std::vector<std::string> class_names;  // catalog order

  Eigen::Index dim() const { return means.rows(); }
  std::size_t size() const { return class_names.size(); }
};

/// Original fine-grained label per sample id, as produced by the split and
/// synthesis routines. A label outside the catalog's shared set scores as
/// unknown.
struct GroundTruth {
  std::vector<std::string> ids;
  std::vector<std::string> labels;

  /// Catalog-level truth aligned with `ds` (shared label or unknown_id).
  /// Throws DataError for ids without a truth entry.
  std::vector<std::string> catalog_labels(const Dataset& ds, const ClassCatalog& catalog) const;
};

/// Inclusive 1-based range of class positions in the alphabetically ordered
/// class list of a pool; lo > hi denotes the empty range.
struct ClassRange {
  int lo = 1;
  int hi = 0;

  bool empty() const { return lo > hi; }
  bool contains(int i) const { return i >= lo && i <= hi; }
  static ClassRange none() { return {1, 0}; }
};

struct OpenSetSplit {
  Dataset source;
  Dataset target;
  GroundTruth truth;
};

// --- loading / saving -------------------------------------------------------

/// Load a feature CSV (`id,label,f1,...,fD`, no header). Target rows may have
/// an empty label column. With a catalog, source labels outside it are
/// rejected (strict mode).
Dataset load_features(const std::string& path, Role role,
                      const ClassCatalog* catalog = nullptr);

void save_features(const Dataset& ds, const std::string& path);

GroundTruth load_ground_truth(const std::string& path);
void save_ground_truth(const GroundTruth& truth, const std::string& path);

// --- operations -------------------------------------------------------------

/// Exact per-class arithmetic means of a fully labeled source. Summation is
/// pairwise over a value-canonicalized sample order, so the result is
/// bit-identical under any permutation of the input rows.
MeanTable class_means(const Dataset& source, const ClassCatalog& catalog);

/// Open-set split of a labeled pool: classes are ordered alphabetically,
/// classes 1..n_shared are shared, `src_unknown` become the source's unknown
/// samples and `tgt_unknown` the target's. Ranges must be disjoint. Row order
/// of both outputs is shuffled deterministically from `seed`; the ground
/// truth keeps the original labels of every target sample.
OpenSetSplit make_open_set_split(const Dataset& pool, int n_shared,
                                 ClassRange src_unknown, ClassRange tgt_unknown,
                                 std::uint64_t seed);

/// Uniform subsample without replacement: exactly `count` samples per label
/// class (requires labels). Row order of survivors is preserved.
Dataset subsample_per_class(const Dataset& ds, std::size_t count, std::uint64_t seed);

/// Uniform subsample without replacement: `count` samples in total.
Dataset subsample_total(const Dataset& ds, std::size_t count, std::uint64_t seed);

// --- synthesis --------------------------------------------------------------

/// target = scale * R(rotation_deg) * x + translation, where R applies the
/// same Givens rotation to successive coordinate pairs (0,1), (2,3), ...
struct AffineShift {
  double rotation_deg = 0.0;
  double scale = 1.0;
  Eigen::VectorXd translation;  // empty = zero

  Eigen::MatrixXd matrix(Eigen::Index dim) const;  // scale * R
  Eigen::VectorXd offset(Eigen::Index dim) const;
};

struct SynthParams {
  int n_classes = 3;
  int n_per_class = 100;
  int dim = 10;
  AffineShift shift;
  double unknown_ratio = 0.0;      // unknown samples per known sample, both domains
  double class_separation = 8.0;   // simplex scale relative to the unit cluster sigma
  double unknown_radius = 0.5;     // anchor radius of the unknown clusters, relative
                                   // to the class radius
  double base_offset = 0.0;        // distance of the constellation center from the origin
  double feature_scale = 1.0;      // global rescale of both domains
};

/// Unit-variance isotropic Gaussian clusters on a scaled simplex centered at
/// base_offset * ones/sqrt(D); the target clusters are the source clusters
/// mapped through `shift`. Unknown samples form one cluster per class,
/// anchored between the class centers at reduced radius: the anchors are
/// shared by the domains (so the unknown population occupies corresponding
/// regions) while the samples and their fine labels stay disjoint.
OpenSetSplit synth_shift(const SynthParams& params, std::uint64_t seed);

}  // namespace osda

#endif  // OSDA_DATASET_HPP
