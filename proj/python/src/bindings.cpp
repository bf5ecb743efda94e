#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "chan/app/benchmark.hpp"
#include "chan/app/commands.hpp"
#include "chan/error.hpp"
#include "chan/eval/matching.hpp"
#include "chan/eval/metrics.hpp"
#include "chan/segmentation/kts.hpp"

namespace py = pybind11;
using namespace chan;

// JSON crosses the boundary as text; the Python side decodes it.

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

FeatureMatrix to_features(const FloatArray& a) {
  if (a.ndim() != 2) throw InvalidArgument("features must be a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return FeatureMatrix(rows, cols, std::vector<float>(a.data(), a.data() + rows * cols));
}

KtsOptions kts_options(std::optional<std::size_t> max_segments, std::optional<std::size_t> max_len,
                       std::optional<double> penalty) {
  KtsOptions o;
  if (max_segments) o.max_segments = *max_segments;
  if (max_len) o.max_segment_len = *max_len;
  if (penalty) o.penalty = *penalty;
  return o;
}

SelectionPolicy policy(std::optional<double> threshold, std::optional<std::size_t> top_k) {
  if (threshold && top_k) throw InvalidArgument("give a threshold or top_k, not both");
  if (top_k) return SelectionPolicy::top_k(*top_k);
  return SelectionPolicy::at_threshold(threshold.value_or(0.5));
}

}  // namespace

PYBIND11_MODULE(_chan, m) {
  m.doc() = "Query-focused video summarization core";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_IOError);

  m.def(
      "kts_segment",
      [](const FloatArray& features, std::optional<std::size_t> max_segments, std::optional<std::size_t> max_segment_len,
         std::optional<double> penalty) {
        const auto r = kts_solve(to_features(features), kts_options(max_segments, max_segment_len, penalty));
        return py::make_tuple(r.boundaries.change_points, r.cost, r.objective);
      },
      py::arg("features"), py::arg("max_segments") = py::none(), py::arg("max_segment_len") = py::none(),
      py::arg("penalty") = py::none(), "Change points, within-segment cost and penalised objective");

  m.def(
      "max_weight_matching",
      [](const DoubleArray& w) {
        if (w.ndim() != 2) throw InvalidArgument("weights must be a 2-D array");
        WeightMatrix wm(static_cast<std::size_t>(w.shape(0)), static_cast<std::size_t>(w.shape(1)));
        std::copy(w.data(), w.data() + wm.values.size(), wm.values.begin());
        std::vector<std::tuple<std::size_t, std::size_t, double>> out;
        for (const auto& p : max_weight_matching(wm)) out.emplace_back(p.row, p.col, p.weight);
        return out;
      },
      py::arg("weights"));

  m.def(
      "concept_iou", [](ConceptSet a, ConceptSet b) {
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return concept_iou(a, b);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "evaluate_summary",
      [](const std::vector<std::size_t>& candidate, const std::vector<std::size_t>& reference,
         std::vector<ConceptSet> annotations) {
        for (auto& a : annotations) std::sort(a.begin(), a.end());
        const auto r = evaluate_summary(candidate, reference, annotations);
        std::vector<std::tuple<std::size_t, std::size_t, double>> pairs;
        for (const auto& p : r.matched_pairs) pairs.emplace_back(p.row, p.col, p.weight);
        py::dict d;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["f1"] = r.f1;
        d["matched_pairs"] = pairs;
        return d;
      },
      py::arg("candidate"), py::arg("reference"), py::arg("annotations"));

  m.def(
      "select_summary",
      [](std::vector<double> scores, std::optional<double> threshold, std::optional<std::size_t> top_k) {
        return select_summary(std::move(scores), policy(threshold, top_k)).selected;
      },
      py::arg("scores"), py::arg("threshold") = py::none(), py::arg("top_k") = py::none());

  m.def("benchmark_synth_config", [] { return nlohmann::json(benchmark_synth_config()).dump(); });
  m.def("benchmark_run_config", [] { return nlohmann::json(benchmark_run_config()).dump(); });

  m.def(
      "gen_data",
      [](const std::filesystem::path& dir, const std::string& config) {
        const auto c = merge_json(nlohmann::json(SynthConfig{}), nlohmann::json::parse(config)).get<SynthConfig>();
        py::gil_scoped_release release;
        return cmd_gen_data(c, dir).dump();
      },
      py::arg("dir"), py::arg("config"));

  m.def(
      "train",
      [](const std::string& config) {
        const auto c = nlohmann::json::parse(config).get<RunConfig>();
        py::gil_scoped_release release;
        return cmd_train(c).dump();
      },
      py::arg("config"));

  m.def(
      "summarize",
      [](const std::filesystem::path& checkpoint, const std::filesystem::path& dataset, std::optional<std::string> video,
         std::optional<std::string> query, std::optional<double> threshold, std::optional<std::size_t> top_k) {
        SummarizeRequest r{checkpoint, dataset, std::move(video), std::move(query), std::nullopt, std::nullopt};
        if (threshold || top_k) r.selection = policy(threshold, top_k);
        py::gil_scoped_release release;
        return cmd_summarize(r).dump();
      },
      py::arg("checkpoint"), py::arg("dataset"), py::arg("video") = py::none(), py::arg("query") = py::none(),
      py::arg("threshold") = py::none(), py::arg("top_k") = py::none());

  m.def(
      "evaluate",
      [](const std::filesystem::path& summaries, const std::filesystem::path& dataset,
         std::optional<std::filesystem::path> references) {
        py::gil_scoped_release release;
        return cmd_evaluate(summaries, dataset, references).dump();
      },
      py::arg("summaries"), py::arg("dataset"), py::arg("references") = py::none());

  m.def(
      "gradcheck",
      [](std::uint64_t seed) {
        py::gil_scoped_release release;
        return cmd_gradcheck(seed).dump();
      },
      py::arg("seed") = 7);
}
