#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "csekit/embeddings.hpp"
#include "csekit/error.hpp"
#include "csekit/lexical_metrics.hpp"
#include "csekit/losses.hpp"
#include "csekit/pattern_sim.hpp"
#include "csekit/repr_metrics.hpp"
#include "csekit/stats.hpp"
#include "csekit/toy_encoder.hpp"

namespace py = pybind11;
using namespace csekit;

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<Embedding> rows_of(const RowMajor& m) {
  std::vector<Embedding> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)].values = m.row(i).transpose();
  return out;
}

ContrastiveBatch make_batch(const RowMajor& anchors, const RowMajor& positives, const std::optional<RowMajor>& negatives,
                            const std::optional<std::vector<bool>>& negative_mask,
                            const std::optional<RowMajor>& intermediates,
                            const std::optional<std::vector<bool>>& ht_mask) {
  ContrastiveBatch b;
  b.anchors = anchors;
  b.positives = positives;
  if (negatives) b.hard_negatives = Eigen::MatrixXd(*negatives);
  if (negative_mask) b.has_hard_negative = *negative_mask;
  if (intermediates) b.intermediates = Eigen::MatrixXd(*intermediates);
  // intermediates without a mask supervise every row
  if (intermediates) b.has_ht_supervision = ht_mask.value_or(std::vector<bool>(static_cast<std::size_t>(anchors.rows()), true));
  return b;
}

GenerationKind parse_generation_kind(const std::string& name) {
  for (auto k : {GenerationKind::kPositive, GenerationKind::kIntermediate, GenerationKind::kNegative})
    if (to_string(k) == name) return k;
  throw ArgumentError("unknown generation kind '" + name + "' (expected positive, intermediate or negative)");
}

}  // namespace

PYBIND11_MODULE(_csekit, m) {
  m.doc() = "Contrastive sentence-embedding toolkit: losses, representation metrics, MER, mock pattern simulation.";

  // module-lifetime reference to the Python exception type
  static PyObject* error_type = py::exception<Error>(m, "CsekitError", PyExc_ValueError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("kind") = e.kind();
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  const auto none = py::none();

  m.def(
      "info_nce",
      [](const RowMajor& a, const RowMajor& p, const std::optional<RowMajor>& n,
         const std::optional<std::vector<bool>>& n_mask, double tau) {
        return info_nce(make_batch(a, p, n, n_mask, std::nullopt, std::nullopt), InfoNCEConfig{tau});
      },
      py::arg("anchors"), py::arg("positives"), py::arg("hard_negatives") = none, py::arg("hard_negative_mask") = none,
      py::arg("tau") = 5e-2, "Contrastive loss with in-batch and optional hard negatives; rows must be unit vectors.");

  m.def(
      "hierarchical_triplet",
      [](const RowMajor& a, const RowMajor& p, const RowMajor& mid, const RowMajor& n,
         const std::optional<std::vector<bool>>& mask, double m1, double m2) -> std::optional<double> {
        const auto r = hierarchical_triplet(make_batch(a, p, n, std::nullopt, mid, mask), HTConfig{m1, m2, 1.0});
        if (r.empty) return std::nullopt;
        return r.value;
      },
      py::arg("anchors"), py::arg("positives"), py::arg("intermediates"), py::arg("hard_negatives"),
      py::arg("mask") = none, py::arg("m1") = 5e-3, py::arg("m2") = 1e-2,
      "Mean hierarchical triplet loss over supervised rows, or None when no row is supervised.");

  m.def(
      "combined_loss",
      [](const RowMajor& a, const RowMajor& p, const std::optional<RowMajor>& n, const std::optional<RowMajor>& mid,
         const std::optional<std::vector<bool>>& n_mask, const std::optional<std::vector<bool>>& ht_mask, double tau,
         double m1, double m2, double beta) {
        const auto r = combined_loss(make_batch(a, p, n, n_mask, mid, ht_mask), InfoNCEConfig{tau}, HTConfig{m1, m2, beta});
        py::dict d;
        d["total"] = r.total;
        d["contrastive"] = r.contrastive;
        d["ht"] = r.ht;
        d["ht_empty"] = r.ht_empty;
        return d;
      },
      py::arg("anchors"), py::arg("positives"), py::arg("hard_negatives") = none, py::arg("intermediates") = none,
      py::arg("hard_negative_mask") = none, py::arg("ht_mask") = none, py::arg("tau") = 5e-2, py::arg("m1") = 5e-3,
      py::arg("m2") = 1e-2, py::arg("beta") = 1.0);

  m.def(
      "alignment",
      [](const RowMajor& x, const RowMajor& y, double alpha) {
        if (x.rows() != y.rows()) throw ArgumentError("alignment: x and y need the same number of rows");
        const auto ex = rows_of(x), ey = rows_of(y);
        std::vector<std::pair<Embedding, Embedding>> pairs;
        for (std::size_t i = 0; i < ex.size(); ++i) pairs.emplace_back(ex[i], ey[i]);
        return alignment(pairs, AlignUniformConfig{alpha, 2.0});
      },
      py::arg("x"), py::arg("y"), py::arg("alpha") = 2.0, "Mean ||x_i - y_i||^alpha over paired unit rows.");

  m.def(
      "uniformity", [](const RowMajor& x, double t) { return uniformity(rows_of(x), AlignUniformConfig{2.0, t}); },
      py::arg("x"), py::arg("t") = 2.0, "log of the mean Gaussian potential over distinct pairs of unit rows.");

  m.def(
      "rfd",
      [](const std::vector<std::array<double, 6>>& rows) {
        Trajectory t;
        for (const auto& r : rows) t.append({static_cast<std::int64_t>(r[0]), r[1], r[2], r[3], r[4], r[5]});
        const auto out = rfd(t);
        return std::make_pair(out.rfd_a, out.rfd_u);
      },
      py::arg("rows"),
      "(rfd_a, rfd_u) from rows (step, align_heldout, unif_heldout, align_eval, unif_eval, spearman_eval).");

  m.def(
      "rfd_from_csv",
      [](const std::filesystem::path& path) {
        const auto out = rfd(read_trajectory_csv(path));
        return std::make_pair(out.rfd_a, out.rfd_u);
      },
      py::arg("path"));

  m.def(
      "mer",
      [](const std::string& s1, const std::string& s2) -> py::object {
        const auto r = mer(s1, s2);
        if (r.empty) return py::none();
        py::dict d;
        d["value"] = r.value;
        d["insertions"] = r.counts.insertions;
        d["deletions"] = r.counts.deletions;
        d["substitutions"] = r.counts.substitutions;
        d["retains"] = r.counts.retains;
        return d;
      },
      py::arg("s1"), py::arg("s2"), "Match error rate with edit counts; None when both sides are empty.");

  m.def(
      "spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman(x, y); }, py::arg("x"),
      py::arg("y"));

  m.def(
      "mock_generate",
      [](const std::string& anchor, const std::string& kind, std::uint64_t seed) {
        return mock_generate(anchor, parse_generation_kind(kind), seed);
      },
      py::arg("anchor"), py::arg("kind"), py::arg("seed") = 0, "Deterministic offline stand-in for an LLM generation.");

  py::class_<ToyEncoder>(m, "ToyEncoder")
      .def(py::init([](int dim, int hidden, int hash_buckets, const std::string& pooling,
                       const std::optional<std::string>& prompt_template, std::uint64_t seed) {
             ToyEncoderConfig c;
             c.dim = dim;
             c.hidden = hidden;
             c.hash_buckets = hash_buckets;
             c.pooling.strategy = parse_pooling(pooling);
             c.pooling.prompt_template = prompt_template;
             c.seed = seed;
             return ToyEncoder(c);
           }),
           py::arg("dim") = 32, py::arg("hidden") = 64, py::arg("hash_buckets") = 8192, py::arg("pooling") = "first_token",
           py::arg("prompt_template") = none, py::arg("seed") = 0)
      .def_property_readonly("dim", &ToyEncoder::dim)
      .def(
          "encode",
          [](const ToyEncoder& enc, const std::vector<std::string>& sentences, bool normalize) {
            return RowMajor(stack_rows(enc.encode(sentences, normalize)));
          },
          py::arg("sentences"), py::arg("normalize") = true, "n x dim array of embeddings in inference mode.");
}
