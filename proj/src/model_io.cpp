#include "dcldmd/model_io.hpp"

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dcldmd {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& mat) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const std::string& name) {
    if (!rows.is_array()) throw std::runtime_error("model file: '" + name + "' must be an array");
    const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = r > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd mat(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != c) {
            throw std::runtime_error("model file: ragged rows in '" + name + "'");
        }
        for (Eigen::Index j = 0; j < c; ++j) mat(i, j) = rows[i][j].get<double>();
    }
    return mat;
}

json cmatrix_to_json(const Eigen::MatrixXcd& mat) {
    return {{"re", matrix_to_json(mat.real())}, {"im", matrix_to_json(mat.imag())}};
}

Eigen::MatrixXcd cmatrix_from_json(const json& obj, const std::string& name) {
    const Eigen::MatrixXd re = matrix_from_json(obj.at("re"), name + ".re");
    const Eigen::MatrixXd im = matrix_from_json(obj.at("im"), name + ".im");
    if (re.rows() != im.rows() || re.cols() != im.cols()) {
        throw std::runtime_error("model file: re/im shape mismatch in '" + name + "'");
    }
    Eigen::MatrixXcd mat(re.rows(), re.cols());
    mat.real() = re;
    mat.imag() = im;
    return mat;
}

json kernel_to_json(const Kernel& kernel) {
    return {{"kind", kernel_kind_name(kernel.kind)}, {"sigma", kernel.sigma}};
}

Kernel kernel_from_json(const json& obj) {
    Kernel kernel;
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "gaussian") kernel.kind = KernelKind::Gaussian;
    else if (kind == "expdot") kernel.kind = KernelKind::ExponentialDotProduct;
    else if (kind == "linear") kernel.kind = KernelKind::Linear;
    else throw std::runtime_error("model file: unknown kernel kind '" + kind + "'");
    kernel.sigma = obj.at("sigma").get<double>();
    return kernel;
}

json load_json(const std::filesystem::path& path, const char* expected_format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("model file " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != expected_format) {
        throw std::runtime_error("model file " + path.string() + ": expected format '" +
                                 expected_format + "'");
    }
    return doc;
}

void write_json(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path.string());
    out << doc.dump(1) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void save_dcldmd_model(const DcldmdModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "dcldmd-model";
    doc["version"] = 1;
    doc["state_dim"] = model.centers.rows();
    doc["center_count"] = model.centers.cols();
    doc["kernel"] = kernel_to_json(model.kernel);
    doc["epsilon"] = model.epsilon;
    doc["centers"] = matrix_to_json(model.centers);
    doc["eigenvalues"] = {{"re", matrix_to_json(model.lambdas.real())},
                          {"im", matrix_to_json(model.lambdas.imag())}};
    doc["eigenvectors"] = cmatrix_to_json(model.V);
    doc["modes"] = cmatrix_to_json(model.Xi);
    doc["degenerate_normalizer"] = model.degenerate_normalizer;
    if (model.feedback_K.size() > 0) doc["feedback_K"] = matrix_to_json(model.feedback_K);
    write_json(doc, path);
}

DcldmdModel load_dcldmd_model(const std::filesystem::path& path) {
    const json doc = load_json(path, "dcldmd-model");
    DcldmdModel model;
    model.kernel = kernel_from_json(doc.at("kernel"));
    model.epsilon = doc.at("epsilon").get<double>();
    model.centers = matrix_from_json(doc.at("centers"), "centers");
    const Eigen::MatrixXcd lam =
        cmatrix_from_json(json{{"re", doc.at("eigenvalues").at("re")},
                               {"im", doc.at("eigenvalues").at("im")}},
                          "eigenvalues");
    model.lambdas = lam.col(0);
    model.V = cmatrix_from_json(doc.at("eigenvectors"), "eigenvectors");
    model.Xi = cmatrix_from_json(doc.at("modes"), "modes");
    model.degenerate_normalizer = doc.value("degenerate_normalizer", std::vector<bool>{});
    if (doc.contains("feedback_K")) {
        model.feedback_K = matrix_from_json(doc.at("feedback_K"), "feedback_K");
    }

    const Eigen::Index n = doc.at("state_dim").get<Eigen::Index>();
    const Eigen::Index M = doc.at("center_count").get<Eigen::Index>();
    if (model.centers.rows() != n || model.centers.cols() != M || model.lambdas.size() != M ||
        model.V.rows() != M || model.V.cols() != M || model.Xi.rows() != n ||
        model.Xi.cols() != M) {
        throw std::runtime_error("model file " + path.string() + ": dimension fields disagree");
    }
    return model;
}

void save_edmdc_model(const EdmdcModel& model, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "edmdc-model";
    doc["version"] = 1;
    doc["A"] = matrix_to_json(model.A);
    doc["B"] = matrix_to_json(model.B);
    doc["C"] = matrix_to_json(model.C);
    json dict;
    if (model.dictionary.kind == LiftingDictionary::Kind::StatePlusRbf) {
        dict["kind"] = "state_plus_rbf";
        dict["centers"] = matrix_to_json(model.dictionary.centers);
        dict["rbf"] = model.dictionary.rbf == RbfKind::ThinPlateSpline ? "thin_plate" : "gaussian";
        dict["scale"] = model.dictionary.scale;
    } else {
        dict["kind"] = "monomials";
        dict["state_dim"] = model.dictionary.state_dim;
        dict["max_degree"] = model.dictionary.max_degree;
    }
    doc["dictionary"] = dict;
    write_json(doc, path);
}

EdmdcModel load_edmdc_model(const std::filesystem::path& path) {
    const json doc = load_json(path, "edmdc-model");
    EdmdcModel model;
    model.A = matrix_from_json(doc.at("A"), "A");
    model.B = matrix_from_json(doc.at("B"), "B");
    model.C = matrix_from_json(doc.at("C"), "C");

    const json& dict = doc.at("dictionary");
    const std::string kind = dict.at("kind").get<std::string>();
    if (kind == "state_plus_rbf") {
        const Eigen::MatrixXd centers = matrix_from_json(dict.at("centers"), "centers");
        const std::string rbf = dict.at("rbf").get<std::string>();
        model.dictionary = LiftingDictionary::state_plus_rbf(
            centers, rbf == "gaussian" ? RbfKind::Gaussian : RbfKind::ThinPlateSpline,
            dict.at("scale").get<double>());
    } else if (kind == "monomials") {
        model.dictionary = LiftingDictionary::monomials(dict.at("state_dim").get<int>(),
                                                        dict.at("max_degree").get<int>());
    } else {
        throw std::runtime_error("model file: unknown dictionary kind '" + kind + "'");
    }

    if (model.A.rows() != model.A.cols() || model.B.rows() != model.A.rows() ||
        model.C.cols() != model.A.rows() ||
        model.A.rows() != model.dictionary.lifted_dim()) {
        throw std::runtime_error("model file " + path.string() + ": inconsistent dimensions");
    }
    return model;
}

}  // namespace dcldmd
