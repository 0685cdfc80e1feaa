#include "fairpsy/models.hpp"

namespace fairpsy {

namespace {

constexpr int kModelFormatVersion = 1;

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

const std::vector<std::string>& TrainedModel::feature_names() const {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.feature_names; }, model_);
}

bool TrainedModel::converged() const { return kind() == ModelKind::forest || logistic().converged; }

Vector predict_scores(const TrainedModel& model, const Matrix& features) {
  const auto width = static_cast<Eigen::Index>(model.feature_names().size());
  if (features.cols() != width)
    throw DataError("feature width " + std::to_string(features.cols()) + " does not match model width " +
                    std::to_string(width));
  Vector out(features.rows());
  if (model.kind() == ModelKind::logistic) {
    const LogisticModel& m = model.logistic();
    const Vector z = (((features.rowwise() - m.mean.transpose()).array().rowwise() / m.scale.transpose().array())
                          .matrix() *
                      m.coef)
                         .array() +
                     m.intercept;
    out = z.unaryExpr([](double v) { return sigmoid(v); });
  } else {
    const ForestModel& m = model.forest();
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      double sum = 0.0;
      for (const auto& tree : m.trees) sum += tree.predict(features.row(i));
      out[i] = m.trees.empty() ? 0.0 : sum / static_cast<double>(m.trees.size());
    }
  }
  return out;
}

nlohmann::json to_json(const TrainedModel& model) {
  nlohmann::json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["feature_names"] = model.feature_names();
  if (model.kind() == ModelKind::logistic) {
    const LogisticModel& m = model.logistic();
    doc["kind"] = "logistic";
    doc["standardization"] = {{"mean", vector_json(m.mean)}, {"scale", vector_json(m.scale)}};
    doc["coefficients"] = vector_json(m.coef);
    doc["intercept"] = m.intercept;
    doc["converged"] = m.converged;
    doc["iterations"] = m.iterations;
  } else {
    doc["kind"] = "forest";
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : model.forest().trees) {
      nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                     left = nlohmann::json::array(), right = nlohmann::json::array(),
                     value = nlohmann::json::array();
      for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
      }
      trees.push_back(
          {{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"value", value}});
    }
    doc["trees"] = std::move(trees);
  }
  return doc;
}

TrainedModel model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw DataError("unsupported model format version");
    const auto kind = doc.at("kind").get<std::string>();
    const auto names = doc.at("feature_names").get<std::vector<std::string>>();
    if (kind == "logistic") {
      LogisticModel m;
      m.feature_names = names;
      m.mean = vector_from_json(doc.at("standardization").at("mean"));
      m.scale = vector_from_json(doc.at("standardization").at("scale"));
      m.coef = vector_from_json(doc.at("coefficients"));
      m.intercept = doc.at("intercept").get<double>();
      m.converged = doc.at("converged").get<bool>();
      m.iterations = doc.at("iterations").get<int>();
      const auto d = static_cast<Eigen::Index>(names.size());
      if (m.mean.size() != d || m.scale.size() != d || m.coef.size() != d)
        throw DataError("logistic model vectors do not match feature count");
      return TrainedModel(std::move(m));
    }
    if (kind == "forest") {
      ForestModel m;
      m.feature_names = names;
      for (const auto& t : doc.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const std::size_t n = feature.size();
        if (threshold.size() != n || left.size() != n || right.size() != n || value.size() != n || n == 0)
          throw DataError("malformed tree");
        DecisionTree tree;
        for (std::size_t i = 0; i < n; ++i) {
          if (feature[i] >= static_cast<int>(names.size()) ||
              (feature[i] >= 0 && (left[i] <= 0 || right[i] <= 0 || left[i] >= static_cast<int>(n) ||
                                   right[i] >= static_cast<int>(n))))
            throw DataError("malformed tree node");
          tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], value[i]});
        }
        m.trees.push_back(std::move(tree));
      }
      return TrainedModel(std::move(m));
    }
    throw DataError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace fairpsy
