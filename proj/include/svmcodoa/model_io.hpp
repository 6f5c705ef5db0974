#pragma once

// Model files are JSON:
//
//   {
//     "format": "svmcodoa-model", "version": 1,
//     "dataset": "hepatitis", "class_names": ["1", "2"],
//     "machines": [
//       { "kernel": {"family": "rbf", "sigma": 0.7, "degree": 1},
//         "c": 1.0, "bias": -0.12,
//         "support_vectors": [[...], ...], "dual_coefs": [...] }
//     ]
//   }
//
// Doubles are written with round-trip precision, so a loaded model
// predicts bit-identically.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmcodoa/dataset.hpp"
#include "svmcodoa/svm.hpp"

namespace svmcodoa {

struct SavedModel {
    std::string dataset;
    std::vector<std::string> class_names;
    MulticlassSvm model;
};

inline nlohmann::json to_json(const TrainedSvm& m) {
    nlohmann::json sv = nlohmann::json::array();
    for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
        const auto r = m.support_vectors.row(i);
        sv.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return {{"kernel", {{"family", std::string(to_string(m.kernel.family))}, {"sigma", m.kernel.sigma}, {"degree", m.kernel.degree}}},
            {"c", m.c},
            {"bias", m.bias},
            {"support_vectors", sv},
            {"dual_coefs", m.dual_coefs}};
}

inline TrainedSvm trained_svm_from_json(const nlohmann::json& j) {
    TrainedSvm m;
    const auto& k = j.at("kernel");
    m.kernel.family = kernel_family_from_string(k.at("family").get<std::string>());
    m.kernel.sigma = k.at("sigma").get<double>();
    m.kernel.degree = k.at("degree").get<int>();
    m.kernel.validate();
    m.c = j.at("c").get<double>();
    m.bias = j.at("bias").get<double>();
    m.dual_coefs = j.at("dual_coefs").get<Vector>();
    const auto rows = j.at("support_vectors").get<std::vector<Vector>>();
    if (rows.size() != m.dual_coefs.size()) throw DataError("model: support vector and coefficient counts differ");
    m.support_vectors = Matrix::from_rows(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) m.support_indices.push_back(i);
    return m;
}

inline nlohmann::json to_json(const SavedModel& s) {
    nlohmann::json machines = nlohmann::json::array();
    for (const auto& m : s.model.machines) machines.push_back(to_json(m));
    return {{"format", "svmcodoa-model"},
            {"version", 1},
            {"dataset", s.dataset},
            {"class_names", s.class_names},
            {"machines", machines}};
}

inline SavedModel saved_model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "svmcodoa-model") throw DataError("model: not an svmcodoa model file");
    if (j.value("version", 0) != 1) throw DataError("model: unsupported version");
    SavedModel s;
    s.dataset = j.value("dataset", "");
    s.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& m : j.at("machines")) s.model.machines.push_back(trained_svm_from_json(m));
    s.model.n_classes = s.class_names.size();
    const bool shape_ok = s.model.n_classes == 2 ? s.model.machines.size() == 1
                                                 : s.model.machines.size() == s.model.n_classes;
    if (s.model.n_classes < 2 || !shape_ok) throw DataError("model: machine count does not match class count");
    return s;
}

inline void save_model(const std::filesystem::path& path, const SavedModel& s) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file " + path.string());
    out << to_json(s).dump(2) << '\n';
}

inline SavedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read model file " + path.string());
    try {
        return saved_model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("model file " + path.string() + ": " + e.what());
    }
}

}  // namespace svmcodoa
