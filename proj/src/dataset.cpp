#include "osda/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace osda {

// --- ClassCatalog ------------------------------------------------------------

std::size_t ClassCatalog::index_of(const std::string& label) const {
  if (label == unknown_id) return unknown_index();
  for (std::size_t i = 0; i < shared_classes.size(); ++i)
    if (shared_classes[i] == label) return i;
  throw LabelError("label not in catalog: '" + label + "'");
}

bool ClassCatalog::contains(const std::string& label) const {
  if (label == unknown_id) return true;
  return std::find(shared_classes.begin(), shared_classes.end(), label) !=
         shared_classes.end();
}

bool ClassCatalog::is_shared(const std::string& label) const {
  return label != unknown_id && contains(label);
}

const std::string& ClassCatalog::label_of(std::size_t index) const {
  if (index == unknown_index()) return unknown_id;
  if (index > shared_classes.size()) throw LabelError("class index out of range");
  return shared_classes[index];
}

ClassCatalog ClassCatalog::from_labels(const std::vector<std::string>& labels) {
  std::set<std::string> distinct;
  for (const auto& l : labels)
    if (!l.empty() && l != kUnknownLabel) distinct.insert(l);
  ClassCatalog cat;
  cat.shared_classes.assign(distinct.begin(), distinct.end());
  return cat;
}

// --- Dataset -----------------------------------------------------------------

std::vector<std::size_t> Dataset::indices_of(const std::string& label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

void Dataset::validate(const ClassCatalog* catalog) const {
  if (features.rows() < 1) throw DataError("dataset dimensionality must be >= 1");
  const auto n = static_cast<std::size_t>(features.cols());
  if (ids.size() != n || labels.size() != n)
    throw DataError("ids/labels size does not match sample count");
  if (!features.allFinite()) throw DataError("dataset contains non-finite values");
  for (std::size_t i = 0; i < n; ++i) {
    if (role == Role::Source && labels[i].empty())
      throw LabelError("source sample '" + ids[i] + "' is unlabeled");
    if (catalog && !labels[i].empty() && !catalog->contains(labels[i]))
      throw LabelError("label '" + labels[i] + "' not in catalog");
  }
}

// --- GroundTruth -------------------------------------------------------------

std::vector<std::string> GroundTruth::catalog_labels(const Dataset& ds,
                                                     const ClassCatalog& catalog) const {
  std::unordered_map<std::string, const std::string*> by_id;
  by_id.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) by_id[ids[i]] = &labels[i];
  std::vector<std::string> out;
  out.reserve(ds.size());
  for (const auto& id : ds.ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("no ground truth for id '" + id + "'");
    const std::string& fine = *it->second;
    out.push_back(catalog.is_shared(fine) ? fine : catalog.unknown_id);
  }
  return out;
}

// --- CSV I/O -----------------------------------------------------------------

Dataset load_features(const std::string& path, Role role, const ClassCatalog* catalog) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids, labels;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 3)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected id,label,f1,...");
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw FormatError(path + ":" + std::to_string(lineno) + ": ragged row (" +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(width) + ")");
    ids.push_back(fields[0]);
    labels.push_back(fields[1]);
    std::vector<double> row(width - 2);
    for (std::size_t j = 2; j < width; ++j) {
      double v;
      try {
        v = parse_double(fields[j]);
      } catch (const FormatError&) {
        throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" +
                          fields[j] + "'");
      }
      if (!std::isfinite(v))
        throw DataError(path + ":" + std::to_string(lineno) + ": non-finite value");
      row[j - 2] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path + ": empty feature file");

  Dataset ds;
  ds.role = role;
  ds.ids = std::move(ids);
  ds.labels = std::move(labels);
  ds.features.resize(static_cast<Eigen::Index>(width - 2),
                     static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t d = 0; d < width - 2; ++d)
      ds.features(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = rows[i][d];
  ds.validate(role == Role::Source ? catalog : nullptr);
  return ds;
}

void save_features(const Dataset& ds, const std::string& path) {
  std::string out;
  out.reserve(ds.size() * 32);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += ds.ids[i];
    out += ',';
    out += ds.labels[i];
    for (Eigen::Index d = 0; d < ds.dim(); ++d) {
      out += ',';
      out += format_double(ds.features(d, static_cast<Eigen::Index>(i)));
    }
    out += '\n';
  }
  write_file(path, out);
}

GroundTruth load_ground_truth(const std::string& path) {
  std::istringstream in(read_file(path));
  GroundTruth gt;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected id,true_label");
    gt.ids.push_back(fields[0]);
    gt.labels.push_back(fields[1]);
  }
  return gt;
}

void save_ground_truth(const GroundTruth& truth, const std::string& path) {
  std::string out;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) {
    out += truth.ids[i];
    out += ',';
    out += truth.labels[i];
    out += '\n';
  }
  write_file(path, out);
}

// --- class means -------------------------------------------------------------

namespace {

// Pairwise sum of the selected columns. The index list is already in the
// canonical (value-sorted) order.
Eigen::VectorXd pairwise_sum(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx,
                             std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return m.col(static_cast<Eigen::Index>(idx[lo]));
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(m, idx, lo, mid) + pairwise_sum(m, idx, mid, hi);
}

bool column_less(const Eigen::MatrixXd& m, std::size_t a, std::size_t b) {
  for (Eigen::Index d = 0; d < m.rows(); ++d) {
    double x = m(d, static_cast<Eigen::Index>(a));
    double y = m(d, static_cast<Eigen::Index>(b));
    if (x != y) return x < y;
  }
  return false;
}

}  // namespace

MeanTable class_means(const Dataset& source, const ClassCatalog& catalog) {
  source.validate(&catalog);
  std::vector<std::string> names = catalog.shared_classes;
  if (!source.indices_of(catalog.unknown_id).empty()) names.push_back(catalog.unknown_id);

  MeanTable table;
  table.class_names = names;
  table.means.resize(source.dim(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    auto idx = source.indices_of(names[c]);
    if (idx.empty())
      throw CoverageError("class '" + names[c] + "' has no source samples");
    // canonical order: sort samples by value so the pairwise sum is
    // permutation-invariant bit for bit
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return column_less(source.features, a, b);
    });
    table.means.col(static_cast<Eigen::Index>(c)) =
        pairwise_sum(source.features, idx, 0, idx.size()) / static_cast<double>(idx.size());
  }
  return table;
}

// --- open-set split ----------------------------------------------------------

namespace {

Dataset gather(const Dataset& pool, const std::vector<std::size_t>& idx, Role role,
               const std::vector<std::string>& labels_override) {
  Dataset out;
  out.role = role;
  out.features.resize(pool.dim(), static_cast<Eigen::Index>(idx.size()));
  out.ids.reserve(idx.size());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) =
        pool.features.col(static_cast<Eigen::Index>(idx[i]));
    out.ids.push_back(pool.ids[idx[i]]);
    out.labels.push_back(labels_override[i]);
  }
  return out;
}

}  // namespace

OpenSetSplit make_open_set_split(const Dataset& pool, int n_shared,
                                 ClassRange src_unknown, ClassRange tgt_unknown,
                                 std::uint64_t seed) {
  pool.validate();
  std::set<std::string> distinct(pool.labels.begin(), pool.labels.end());
  std::vector<std::string> ordered(distinct.begin(), distinct.end());
  const int n_classes = static_cast<int>(ordered.size());

  if (n_shared < 1 || n_shared > n_classes)
    throw ProtocolError("n_shared out of range");
  auto check_range = [&](const ClassRange& r, const char* what) {
    if (r.empty()) return;
    if (r.lo < 1 || r.hi > n_classes)
      throw ProtocolError(std::string(what) + " range exceeds class count");
    if (r.lo <= n_shared)
      throw ProtocolError(std::string(what) + " range overlaps shared classes");
  };
  check_range(src_unknown, "source-unknown");
  check_range(tgt_unknown, "target-unknown");
  if (!src_unknown.empty() && !tgt_unknown.empty() &&
      src_unknown.lo <= tgt_unknown.hi && tgt_unknown.lo <= src_unknown.hi)
    throw ProtocolError("source-unknown and target-unknown ranges overlap");

  std::vector<std::size_t> src_idx, tgt_idx;
  std::vector<std::string> src_labels, tgt_labels;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& label = pool.labels[i];
    int pos = 1 + static_cast<int>(std::find(ordered.begin(), ordered.end(), label) -
                                   ordered.begin());
    if (pos <= n_shared) {
      src_idx.push_back(i);
      src_labels.push_back(label);
      tgt_idx.push_back(i);
      tgt_labels.push_back("");
    } else if (src_unknown.contains(pos)) {
      src_idx.push_back(i);
      src_labels.push_back(kUnknownLabel);
    } else if (tgt_unknown.contains(pos)) {
      tgt_idx.push_back(i);
      tgt_labels.push_back("");
    }
  }

  auto shuffle_rows = [](std::vector<std::size_t>& idx, std::vector<std::string>& labels,
                         Rng& rng) {
    std::vector<std::size_t> perm(idx.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<std::size_t> idx2(idx.size());
    std::vector<std::string> lab2(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      idx2[i] = idx[perm[i]];
      lab2[i] = labels[perm[i]];
    }
    idx.swap(idx2);
    labels.swap(lab2);
  };
  Rng src_rng = Rng::stream(seed, "split/source");
  Rng tgt_rng = Rng::stream(seed, "split/target");
  shuffle_rows(src_idx, src_labels, src_rng);
  shuffle_rows(tgt_idx, tgt_labels, tgt_rng);

  OpenSetSplit split;
  split.source = gather(pool, src_idx, Role::Source, src_labels);
  split.target = gather(pool, tgt_idx, Role::Target, tgt_labels);
  for (std::size_t i : tgt_idx) {
    split.truth.ids.push_back(pool.ids[i]);
    split.truth.labels.push_back(pool.labels[i]);
  }
  return split;
}

// --- subsampling -------------------------------------------------------------

namespace {

Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& keep) {
  Dataset out;
  out.role = ds.role;
  out.features.resize(ds.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) =
        ds.features.col(static_cast<Eigen::Index>(keep[i]));
    out.ids.push_back(ds.ids[keep[i]]);
    out.labels.push_back(ds.labels[keep[i]]);
  }
  return out;
}

}  // namespace

Dataset subsample_per_class(const Dataset& ds, std::size_t count, std::uint64_t seed) {
  std::set<std::string> distinct;
  for (const auto& l : ds.labels) {
    if (l.empty()) throw SamplingError("per-class subsampling needs labeled data");
    distinct.insert(l);
  }
  std::vector<std::size_t> keep;
  for (const auto& label : distinct) {
    auto idx = ds.indices_of(label);
    if (count > idx.size())
      throw SamplingError("class '" + label + "' has " + std::to_string(idx.size()) +
                          " samples, requested " + std::to_string(count));
    Rng rng = Rng::stream(seed, "subsample/class/" + label);
    for (std::size_t pick : rng.sample_without_replacement(idx.size(), count))
      keep.push_back(idx[pick]);
  }
  std::sort(keep.begin(), keep.end());
  return take_rows(ds, keep);
}

Dataset subsample_total(const Dataset& ds, std::size_t count, std::uint64_t seed) {
  if (count > ds.size())
    throw SamplingError("requested " + std::to_string(count) + " of " +
                        std::to_string(ds.size()) + " samples");
  Rng rng = Rng::stream(seed, "subsample/total");
  auto keep = rng.sample_without_replacement(ds.size(), count);
  return take_rows(ds, keep);
}

// --- synthesis ---------------------------------------------------------------

Eigen::MatrixXd AffineShift::matrix(Eigen::Index dim) const {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(dim, dim);
  const double a = rotation_deg * M_PI / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  for (Eigen::Index i = 0; i + 1 < dim; i += 2) {
    r(i, i) = c;
    r(i, i + 1) = -s;
    r(i + 1, i) = s;
    r(i + 1, i + 1) = c;
  }
  return scale * r;
}

Eigen::VectorXd AffineShift::offset(Eigen::Index dim) const {
  if (translation.size() == 0) return Eigen::VectorXd::Zero(dim);
  if (translation.size() != dim) throw DataError("translation dimensionality mismatch");
  return translation;
}

namespace {

Eigen::VectorXd random_unit(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  double norm2;
  do {
    for (Eigen::Index d = 0; d < dim; ++d) v(d) = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

}  // namespace

OpenSetSplit synth_shift(const SynthParams& p, std::uint64_t seed) {
  if (p.dim < 2) throw ConfigError("synth_shift requires D >= 2");
  if (p.n_classes < 2) throw ConfigError("synth_shift requires >= 2 classes");
  if (p.n_per_class < 1) throw ConfigError("synth_shift requires >= 1 sample per class");
  if (p.unknown_ratio < 0) throw ConfigError("unknown_ratio must be >= 0");

  const Eigen::Index dim = p.dim;
  Rng center_rng = Rng::stream(seed, "synth/centers");

  // shared class centers on a scaled simplex, recentered so the vertex
  // centroid sits at base_offset * ones/sqrt(D); axes first, random unit
  // directions if there are more classes than dimensions
  std::vector<Eigen::VectorXd> centers;
  for (int c = 0; c < p.n_classes; ++c) {
    Eigen::VectorXd u;
    if (c < dim) {
      u = Eigen::VectorXd::Zero(dim);
      u(c) = 1.0;
    } else {
      u = random_unit(center_rng, dim);
    }
    centers.push_back(p.class_separation * u);
  }
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
  for (const auto& c : centers) centroid += c / static_cast<double>(centers.size());
  for (auto& c : centers) c -= centroid;

  // unknown clusters sit interspersed between the shared classes at reduced
  // radius, one anchor opposite each class. The anchors are the same in both
  // domains, the way a diverse background population occupies corresponding
  // feature regions; the half-margin of an unknown region is roughly half
  // that of a class region, so a domain shift breaks the unknowns first.
  std::vector<Eigen::VectorXd> unknown_anchors;
  for (int c = 0; c < p.n_classes; ++c)
    unknown_anchors.push_back(-p.unknown_radius * centers[static_cast<std::size_t>(c)]);

  const Eigen::VectorXd base =
      p.base_offset * Eigen::VectorXd::Ones(dim) / std::sqrt(static_cast<double>(dim));
  for (auto& c : centers) c += base;
  for (auto& a : unknown_anchors) a += base;

  const std::size_t n_known = static_cast<std::size_t>(p.n_classes) *
                              static_cast<std::size_t>(p.n_per_class);
  const std::size_t n_unknown =
      static_cast<std::size_t>(std::llround(p.unknown_ratio * static_cast<double>(n_known)));

  const Eigen::MatrixXd shift_mat = p.shift.matrix(dim);
  const Eigen::VectorXd shift_off = p.shift.offset(dim);

  auto class_name = [&](int c) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "class_%02d", c);
    return std::string(buf);
  };

  OpenSetSplit out;
  auto emit = [&](Dataset& ds, GroundTruth* truth, Rng& rng, const char* id_prefix,
                  bool shifted, bool label_rows, const std::string& unk_prefix) {
    std::size_t total = n_known + n_unknown;
    ds.features.resize(dim, static_cast<Eigen::Index>(total));
    ds.ids.reserve(total);
    ds.labels.reserve(total);
    std::size_t row = 0;
    auto push = [&](const Eigen::VectorXd& center, const std::string& label,
                    const std::string& fine) {
      Eigen::VectorXd x(dim);
      for (Eigen::Index d = 0; d < dim; ++d) x(d) = center(d) + rng.normal();
      if (shifted) x = shift_mat * x + shift_off;
      ds.features.col(static_cast<Eigen::Index>(row)) = p.feature_scale * x;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s%06zu", id_prefix, row);
      ds.ids.emplace_back(buf);
      ds.labels.push_back(label_rows ? label : std::string());
      if (truth) {
        truth->ids.emplace_back(buf);
        truth->labels.push_back(fine);
      }
      ++row;
    };
    for (int c = 0; c < p.n_classes; ++c)
      for (int i = 0; i < p.n_per_class; ++i) push(centers[c], class_name(c), class_name(c));
    for (std::size_t u = 0; u < n_unknown; ++u) {
      std::size_t cluster = u % unknown_anchors.size();
      char fine[32];
      std::snprintf(fine, sizeof(fine), "%s%02zu", unk_prefix.c_str(), cluster);
      push(unknown_anchors[cluster], kUnknownLabel, fine);
    }
  };

  Rng src_rng = Rng::stream(seed, "synth/source");
  Rng tgt_rng = Rng::stream(seed, "synth/target");
  out.source.role = Role::Source;
  emit(out.source, nullptr, src_rng, "s", false, true, "src_unk_");
  out.target.role = Role::Target;
  emit(out.target, &out.truth, tgt_rng, "t", true, false, "tgt_unk_");
  return out;
}

}  // namespace osda
