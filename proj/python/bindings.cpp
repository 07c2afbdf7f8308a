/*
 * acr: adaptive coordinate-based regression loss for face alignment
 *
 * Copyright 2026 The acr authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "acr/dataio.hpp"
#include "acr/errors.hpp"
#include "acr/hardness.hpp"
#include "acr/loss.hpp"
#include "acr/metrics.hpp"
#include "acr/shape_model.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;

namespace {

std::vector<acr::HardnessWeights> to_weights(const std::vector<Eigen::VectorXd>& phis)
{
    std::vector<acr::HardnessWeights> out;
    out.reserve(phis.size());
    for (const auto& p : phis) {
        out.push_back({p});
    }
    return out;
}

py::dict report_to_dict(const acr::LossReport& r)
{
    py::dict d;
    d["total"] = r.total;
    d["per_element"] = r.per_element;
    d["grad_pred"] = r.grad_pred;
    std::vector<std::string> branches;
    branches.reserve(r.branch_taken.size());
    for (const auto b : r.branch_taken) {
        branches.emplace_back(b == acr::LossBranch::log ? "log" : "quad");
    }
    d["branch_taken"] = branches;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Adaptive coordinate-based regression loss: shape model, hardness weights, loss and metrics";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
    error_type.call_once_and_store_result([&]() { return py::exception<acr::Error>(m, "AcrError"); });
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const acr::InvalidInputError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const acr::Error& e) {
            py::set_error(error_type.get_stored(), e.what());
        }
    });

    py::class_<acr::ShapeModel>(m, "ShapeModel")
        .def_readonly("mean_face", &acr::ShapeModel::mean_face)
        .def_readonly("eigenvectors", &acr::ShapeModel::eigenvectors)
        .def_readonly("eigenvalues", &acr::ShapeModel::eigenvalues)
        .def_readonly("num_training_samples", &acr::ShapeModel::num_training_samples)
        .def("to_json", &acr::serialize_shape_model)
        .def_static("from_json", &acr::deserialize_shape_model);

    m.def("fit_shape_model", [](const std::vector<Eigen::VectorXd>& samples) { return acr::fit_shape_model(samples); },
          py::arg("samples"));
    m.def("project",
          [](const acr::ShapeModel& model, const Eigen::VectorXd& face, Eigen::Index num_eigs) {
              return acr::project(model, face, num_eigs).b;
          },
          py::arg("model"), py::arg("face"), py::arg("num_eigs"));
    m.def("clamp_params",
          [](const Eigen::VectorXd& b, const Eigen::VectorXd& eigenvalues) {
              return acr::clamp_params({b}, eigenvalues).b;
          },
          py::arg("b"), py::arg("eigenvalues"));
    m.def("smooth_face",
          [](const acr::ShapeModel& model, const Eigen::VectorXd& face, double fraction, bool clamp) {
              return acr::smooth_face(model, face, fraction, clamp);
          },
          py::arg("model"), py::arg("face"), py::arg("fraction"), py::arg("clamp") = true);
    m.def("fraction_for_epoch",
          [](long long epoch, const std::string& schedule) {
              const auto s = schedule.empty() ? acr::EigFractionSchedule::standard()
                                              : acr::EigFractionSchedule::parse(schedule);
              return acr::fraction_for_epoch(s, epoch);
          },
          py::arg("epoch"), py::arg("schedule") = "",
          "Eigenvector fraction for an epoch; the schedule string is 'last_epoch:fraction,...'.");

    m.def("hardness_weights",
          [](const Eigen::VectorXd& face, const Eigen::VectorXd& smooth, bool per_point) {
              return acr::hardness_weights(face, smooth,
                                           per_point ? acr::HardnessGranularity::per_point
                                                     : acr::HardnessGranularity::per_coordinate)
                  .phi;
          },
          py::arg("face"), py::arg("smooth"), py::arg("per_point") = false);

    m.def("delta", &acr::delta, py::arg("face"), py::arg("pred"));
    m.def("acr_loss_elem",
          [](double d, double phi, double lambda, bool phi_constant) {
              return acr::acr_loss_elem(d, phi,
                                        {lambda, 1.0,
                                         phi_constant ? acr::ContinuityConstant::phi_scaled
                                                        : acr::ContinuityConstant::continuous});
          },
          py::arg("d"), py::arg("phi"), py::arg("lam") = 4.0, py::arg("phi_constant") = false);
    m.def("acr_grad_elem",
          [](double d, double phi, double lambda) { return acr::acr_grad_elem(d, phi, {lambda}); }, py::arg("d"),
          py::arg("phi"), py::arg("lam") = 4.0);
    m.def("acr_loss_batch",
          [](const std::vector<Eigen::VectorXd>& faces, const std::vector<Eigen::VectorXd>& preds,
             const std::vector<Eigen::VectorXd>& phis, double lambda) {
              return report_to_dict(acr::acr_loss_batch(faces, preds, to_weights(phis), {lambda}));
          },
          py::arg("faces"), py::arg("preds"), py::arg("phis"), py::arg("lam") = 4.0);
    m.def("l2_loss_batch",
          [](const std::vector<Eigen::VectorXd>& faces, const std::vector<Eigen::VectorXd>& preds) {
              return report_to_dict(acr::l2_loss_batch(faces, preds));
          },
          py::arg("faces"), py::arg("preds"));

    m.def("mean_point_error", &acr::mean_point_error, py::arg("gt"), py::arg("pred"));
    m.def("normalization_factor",
          py::overload_cast<const acr::ShapeSample&, std::size_t, std::size_t>(&acr::normalization_factor),
          py::arg("gt"), py::arg("left_eye_outer_idx") = 36, py::arg("right_eye_outer_idx") = 45);
    m.def("evaluate",
          [](const std::vector<Eigen::VectorXd>& gts, const std::vector<Eigen::VectorXd>& preds,
             const std::vector<double>& norms) {
              if (gts.size() != preds.size() || gts.size() != norms.size()) {
                  throw acr::InvalidInputError("evaluate: gts, preds and norm factors differ in length");
              }
              std::vector<acr::EvalRecord> records;
              for (std::size_t i = 0; i < gts.size(); ++i) {
                  records.push_back({gts[i], preds[i], norms[i]});
              }
              const auto s = acr::evaluate(records);
              py::dict d;
              d["nme"] = s.nme;
              d["fr"] = s.fr;
              d["auc"] = s.auc;
              d["ced"] = s.ced;
              d["per_image_error"] = s.per_image_error;
              return d;
          },
          py::arg("gts"), py::arg("preds"), py::arg("norm_factors"));

    m.def("parse_pts",
          [](const std::string& text) {
              std::vector<std::pair<double, double>> out;
              for (const auto& p : acr::parse_pts(text)) {
                  out.emplace_back(p.x, p.y);
              }
              return out;
          },
          py::arg("text"));
    m.def("template_face_68", &acr::template_face_68);
}
