// Python bindings for the slice-discovery engine. The module mirrors the C++
// pipeline stages one to one: generate or load a dump, find the mispredicted
// samples, filter concepts, fit the slicer, then explain, rank and score the
// slices. Matrices cross the boundary as plain nested lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <vector>

#include "cbslice/errors.hpp"
#include "cbslice/eval.hpp"
#include "cbslice/explain.hpp"
#include "cbslice/filter.hpp"
#include "cbslice/io.hpp"
#include "cbslice/matrix.hpp"
#include "cbslice/model.hpp"
#include "cbslice/prioritize.hpp"
#include "cbslice/slicing.hpp"
#include "cbslice/synth.hpp"

namespace py = pybind11;

namespace {

py::list matrix_rows(const cbslice::Matrix& m) {
  py::list rows;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    py::list row;
    for (std::size_t c = 0; c < m.cols(); ++c) row.append(m(r, c));
    rows.append(row);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace cbslice;

  m.doc() = "Error-slice discovery for concept-bottleneck prediction dumps";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const IoError& e) {
      PyErr_SetString(PyExc_OSError, e.what());
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const PreconditionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::enum_<EcsaPosterior>(m, "EcsaPosterior")
      .value("full", EcsaPosterior::full)
      .value("marginal", EcsaPosterior::marginal);

  py::class_<LinearPredictor>(m, "LinearPredictor")
      .def_property_readonly("n_classes", &LinearPredictor::n_classes)
      .def_property_readonly("n_concepts", &LinearPredictor::n_concepts)
      .def_property_readonly(
          "weights", [](const LinearPredictor& p) { return matrix_rows(p.weights); })
      .def_readonly("bias", &LinearPredictor::bias);

  py::class_<EvalDump>(m, "EvalDump")
      .def_readonly("n_samples", &EvalDump::n_samples)
      .def_readonly("n_concepts", &EvalDump::n_concepts)
      .def_readonly("n_classes", &EvalDump::n_classes)
      .def_readonly("labels_true", &EvalDump::labels_true)
      .def_readonly("slice_labels", &EvalDump::slice_labels)
      .def_readonly("concept_names", &EvalDump::concept_names)
      .def_readonly("class_names", &EvalDump::class_names)
      .def_readonly("predictor", &EvalDump::predictor)
      .def_property_readonly(
          "concept_logits", [](const EvalDump& d) { return matrix_rows(d.concept_logits); })
      .def_property_readonly(
          "concepts_true", [](const EvalDump& d) { return matrix_rows(d.concepts_true); })
      .def("predicted_labels", [](const EvalDump& d) { return predicted_labels(d); });

  py::class_<ErrorSet>(m, "ErrorSet")
      .def_readonly("indices", &ErrorSet::indices)
      .def_readonly("per_class", &ErrorSet::per_class)
      .def("__len__", &ErrorSet::size);

  py::class_<EctpTable>(m, "EctpTable")
      .def_property_readonly(
          "scores", [](const EctpTable& t) { return matrix_rows(t.scores); })
      .def_readonly("has_errors", &EctpTable::has_errors);

  py::class_<ConceptFilter>(m, "ConceptFilter")
      .def_readonly("c_err", &ConceptFilter::c_err)
      .def_readonly("t_e", &ConceptFilter::t_e)
      .def_readonly("per_class_top", &ConceptFilter::per_class_top)
      .def_readonly("warnings", &ConceptFilter::warnings)
      .def_readonly("table", &ConceptFilter::table);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("t_g", &TrainConfig::t_g)
      .def_readwrite("lambda_", &TrainConfig::lambda)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("lr", &TrainConfig::lr)
      .def_readwrite("lr_decay_factor", &TrainConfig::lr_decay_factor)
      .def_readwrite("lr_decay_every", &TrainConfig::lr_decay_every)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("variance_floor", &TrainConfig::variance_floor)
      .def_readwrite("enable_gmm_loss", &TrainConfig::enable_gmm_loss)
      .def_readwrite("enable_true_loss", &TrainConfig::enable_true_loss)
      .def_readwrite("enable_pred_loss", &TrainConfig::enable_pred_loss);

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("l_gmm", &EpochStats::l_gmm)
      .def_readonly("l_true", &EpochStats::l_true)
      .def_readonly("l_pred", &EpochStats::l_pred)
      .def_readonly("acc_true", &EpochStats::acc_true)
      .def_readonly("acc_pred", &EpochStats::acc_pred)
      .def_readonly("lr", &EpochStats::lr);

  py::class_<SliceModel>(m, "SliceModel")
      .def_property_readonly("t_g", &SliceModel::t_g)
      .def_property_readonly("k_err", &SliceModel::k_err)
      .def_readonly("c_err", &SliceModel::c_err)
      .def_readonly("history", &SliceModel::history);

  py::class_<SliceAssignment>(m, "SliceAssignment")
      .def_property_readonly(
          "posteriors", [](const SliceAssignment& a) { return matrix_rows(a.posteriors); })
      .def_readonly("hard_slice", &SliceAssignment::hard_slice)
      .def_readonly("predicted", &SliceAssignment::predicted)
      .def_property_readonly("n_slices", &SliceAssignment::n_slices)
      .def_property_readonly("n_errors", &SliceAssignment::n_errors);

  py::class_<KeywordConcept>(m, "KeywordConcept")
      .def_readonly("concept_index", &KeywordConcept::concept_index)
      .def_readonly("name", &KeywordConcept::name)
      .def_readonly("predicted_present", &KeywordConcept::predicted_present)
      .def_readonly("correct", &KeywordConcept::correct)
      .def_readonly("mean_score", &KeywordConcept::mean_score);

  py::class_<SliceExplanation>(m, "SliceExplanation")
      .def_readonly("slice_id", &SliceExplanation::slice_id)
      .def_readonly("keywords", &SliceExplanation::keywords)
      .def_readonly("exemplars", &SliceExplanation::exemplars);

  py::class_<SliceScore>(m, "SliceScore")
      .def_readonly("slice_id", &SliceScore::slice_id)
      .def_readonly("n_eff", &SliceScore::n_eff)
      .def_readonly("mc", &SliceScore::mc)
      .def_readonly("sc", &SliceScore::sc)
      .def_readonly("si", &SliceScore::si)
      .def_readonly("members", &SliceScore::members);

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("precision_at_10", &MetricReport::precision_at_10)
      .def_readonly("mgf", &MetricReport::mgf)
      .def_readonly("truth_ids", &MetricReport::truth_ids)
      .def_readonly("matching", &MetricReport::matching)
      .def_property_readonly(
          "per_pair_p10", [](const MetricReport& r) { return matrix_rows(r.per_pair_p10); });

  m.def(
      "mnist_sum_dump",
      [](std::uint64_t seed, double scale, double flip_prob, bool corrupt_rare,
         int distractor_concepts, double noise_sd, double margin) {
        MnistSumOptions opts{scale,       flip_prob, corrupt_rare,
                             distractor_concepts, noise_sd,  margin};
        return generate(mnist_sum_config(seed, opts));
      },
      py::arg("seed"), py::arg("scale") = 1.0, py::arg("flip_prob") = 0.95,
      py::arg("corrupt_rare") = true, py::arg("distractor_concepts") = 0,
      py::arg("noise_sd") = 1.0, py::arg("margin") = 4.0,
      "Digit-sum validation dump with two planted failure modes");

  m.def(
      "two_pattern_dump",
      [](std::uint64_t seed, std::size_t pattern_count, std::size_t filler_count,
         double noise_sd, double margin) {
        TwoPatternOptions opts{pattern_count, filler_count, noise_sd, margin};
        return generate(two_pattern_config(seed, opts));
      },
      py::arg("seed"), py::arg("pattern_count") = 40, py::arg("filler_count") = 30,
      py::arg("noise_sd") = 1.0, py::arg("margin") = 4.0,
      "Dump with two planted error patterns separated by one concept");

  m.def(
      "read_dump", [](const std::filesystem::path& dir) { return read_dump(dir); },
      py::arg("dir"), "Load a prediction dump directory");
  m.def(
      "write_dump",
      [](const EvalDump& dump, const std::filesystem::path& dir) {
        write_dump(dump, dir);
      },
      py::arg("dump"), py::arg("dir"), "Write a prediction dump directory");

  m.def(
      "error_set", [](const EvalDump& dump) { return error_set(dump); },
      py::arg("dump"), "Indices of mispredicted samples, total and per class");

  m.def(
      "classwise_ectp",
      [](const EvalDump& dump, const ErrorSet& errs) {
        return classwise_ectp(dump, errs);
      },
      py::arg("dump"), py::arg("errs"),
      "Per-class mean turbulence score of every concept");

  m.def(
      "select_error_prone",
      [](const EctpTable& table, int t_e) { return select_error_prone(table, t_e); },
      py::arg("table"), py::arg("t_e"),
      "Union of each class's top t_e concepts by turbulence");

  m.def(
      "all_concepts_filter",
      [](const EvalDump& dump) { return all_concepts_filter(dump); }, py::arg("dump"),
      "Pass-through filter keeping every concept");

  m.def(
      "fit_slices",
      [](const EvalDump& dump, const ErrorSet& errs, const ConceptFilter& filter,
         const TrainConfig& config) {
        return fit_slices(dump, errs, filter, config);
      },
      py::arg("dump"), py::arg("errs"), py::arg("filter"),
      py::arg("config") = TrainConfig{},
      "Fit the mixture slicer on the mispredicted samples");

  m.def(
      "fit_slices_linear",
      [](const EvalDump& dump, const ErrorSet& errs, const ConceptFilter& filter,
         const TrainConfig& config) {
        return fit_slices_linear(dump, errs, filter, config);
      },
      py::arg("dump"), py::arg("errs"), py::arg("filter"),
      py::arg("config") = TrainConfig{}, "Fit the linear baseline slicer");

  m.def(
      "build_assignment",
      [](const SliceModel& model, const EvalDump& dump, const ErrorSet& errs) {
        return build_assignment(model, dump, errs);
      },
      py::arg("model"), py::arg("dump"), py::arg("errs"),
      "Slice posteriors and hard memberships of every mispredicted sample");

  m.def(
      "explain_slices",
      [](const SliceModel& model, const EvalDump& dump, const ErrorSet& errs,
         const SliceAssignment& assign, int t_k, double eps, EcsaPosterior mode,
         std::size_t n_exemplars) {
        return explain_slices(model, dump, errs, assign, t_k, eps, mode, n_exemplars);
      },
      py::arg("model"), py::arg("dump"), py::arg("errs"), py::arg("assign"),
      py::arg("t_k") = 5, py::arg("eps") = 1e-4,
      py::arg("mode") = EcsaPosterior::full, py::arg("n_exemplars") = 5,
      "Keyword concepts and exemplars for every non-empty slice");

  m.def(
      "rank_slices",
      [](const SliceModel& model, const EvalDump& dump, const ErrorSet& errs,
         double tau) { return rank_slices(model, dump, errs, tau); },
      py::arg("model"), py::arg("dump"), py::arg("errs"), py::arg("tau") = 5.0,
      "Order slices by informativeness");

  m.def(
      "evaluate_discovery",
      [](const SliceAssignment& assign, const std::vector<int>& truth) {
        return evaluate_discovery(assign, truth);
      },
      py::arg("assign"), py::arg("truth"),
      "Precision@10 and matched-slice purity against annotations");
}
