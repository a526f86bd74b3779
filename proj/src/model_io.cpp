#include "kpl/model_io.hpp"

#include "kpl/csv_io.hpp"
#include "kpl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace kpl::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

int as_int(const std::map<std::string, double>& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end()) throw InvalidArgument("dictionary parameters lack '" + key + "'");
  return static_cast<int>(std::lround(it->second));
}

}  // namespace

void save_dictionary(const fs::path& dir, const Dictionary& dict) {
  fs::create_directories(dir);
  json j{{"family", to_string(dict.family())}, {"size", dict.size()}};
  const auto& p = dict.parameters();
  switch (dict.family()) {
    case DictionaryFamily::fourier: j["frequencies"] = as_int(p, "frequencies"); break;
    case DictionaryFamily::wavelet:
      j["vanishing_moments"] = as_int(p, "vanishing_moments");
      j["levels"] = as_int(p, "levels");
      break;
    case DictionaryFamily::rff:
      j["lengthscale"] = p.at("lengthscale");
      j["d"] = as_int(p, "d");
      j["seed"] = static_cast<std::uint64_t>(std::llround(p.at("seed")));
      break;
    case DictionaryFamily::learned: {
      const Eigen::VectorXd& grid = *dict.grid();
      const Eigen::MatrixXd& atoms = *dict.grid_atoms();
      Eigen::MatrixXd table(grid.size(), atoms.cols() + 1);
      table << grid, atoms;
      std::vector<std::string> header{"theta"};
      for (Eigen::Index l = 0; l < atoms.cols(); ++l) header.push_back("atom_" + std::to_string(l + 1));
      write_matrix_csv(dir / "atoms.csv", table, header);
      j["atoms_file"] = "atoms.csv";
      break;
    }
    case DictionaryFamily::custom: throw InvalidArgument("custom dictionaries cannot be serialized");
  }
  write_json(dir / "dictionary.json", j);
}

Dictionary load_dictionary(const fs::path& dir) {
  const json j = read_json(dir / "dictionary.json");
  try {
    const auto family = dictionary_family_from_string(j.at("family").get<std::string>());
    switch (family) {
      case DictionaryFamily::fourier: return make_fourier(j.at("frequencies").get<int>());
      case DictionaryFamily::wavelet:
        return make_wavelet(j.at("vanishing_moments").get<int>(), j.at("levels").get<int>());
      case DictionaryFamily::rff:
        return make_rff(j.at("lengthscale").get<double>(), j.at("d").get<int>(), j.at("seed").get<std::uint64_t>());
      case DictionaryFamily::learned: {
        const Eigen::MatrixXd table = read_matrix_csv(dir / j.at("atoms_file").get<std::string>());
        if (table.cols() < 2) throw InvalidArgument("atoms file needs a theta column and at least one atom");
        return make_learned(table.col(0), table.rightCols(table.cols() - 1));
      }
      case DictionaryFamily::custom: break;
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("invalid dictionary.json: " + std::string(e.what()));
  }
  throw InvalidArgument("custom dictionaries cannot be loaded");
}

void save_model(const fs::path& dir, const KplModel& model) {
  model.validate();
  fs::create_directories(dir);
  save_dictionary(dir / "dictionary", model.dictionary);
  write_matrix_csv(dir / "alpha.csv", model.alpha);

  const bool matrix_inputs = model.training_inputs.front().is_matrix();
  if (matrix_inputs) {
    const auto rows = model.training_inputs.front().rows();
    write_matrix_inputs_csv(dir / "inputs.csv", model.training_inputs, linspace(rows));
  } else {
    write_vector_inputs_csv(dir / "inputs.csv", model.training_inputs);
  }
  json j{{"format_version", kFormatVersion},
         {"d", model.alpha.rows()},
         {"n", model.alpha.cols()},
         {"lambda", model.lambda},
         {"kernel", {{"variant", to_string(model.kernel.variant)}, {"sigma", model.kernel.sigma}}},
         {"B", {{"variant", to_string(model.b_spec.variant)}, {"b", model.b_spec.b}}},
         {"inputs", {{"kind", matrix_inputs ? "matrix" : "vector"}, {"file", "inputs.csv"}}},
         {"alpha_file", "alpha.csv"},
         {"dictionary_dir", "dictionary"}};
  if (model.output_offset) {
    write_functions_csv(dir / "offset.csv", {*model.output_offset});
    j["offset_file"] = "offset.csv";
  }
  write_json(dir / "model.json", j);
}

KplModel load_model(const fs::path& dir) {
  const json j = read_json(dir / "model.json");
  try {
    if (j.at("format_version").get<int>() != kFormatVersion) throw InvalidArgument("unsupported model format version");
    Dictionary dict = load_dictionary(dir / j.at("dictionary_dir").get<std::string>());
    Eigen::MatrixXd alpha = read_matrix_csv(dir / j.at("alpha_file").get<std::string>());
    const auto& in = j.at("inputs");
    const fs::path inputs_file = dir / in.at("file").get<std::string>();
    std::vector<InputPoint> inputs = in.at("kind").get<std::string>() == "matrix" ? read_matrix_inputs_csv(inputs_file)
                                                                                  : read_vector_inputs_csv(inputs_file);
    const auto& k = j.at("kernel");
    const auto kv = kernel_variant_from_string(k.at("variant").get<std::string>());
    const double sigma = k.at("sigma").get<double>();
    const ScalarKernel kernel = kv == ScalarKernel::Variant::gaussian  ? ScalarKernel::gaussian(sigma)
                                : kv == ScalarKernel::Variant::laplace ? ScalarKernel::laplace(sigma)
                                                                       : ScalarKernel::integral_gaussian(sigma);
    const auto& b = j.at("B");
    const OutputStructure bs{output_structure_from_string(b.at("variant").get<std::string>()), b.at("b").get<double>()};
    std::optional<SampledFunction> offset;
    if (j.contains("offset_file")) {
      auto table = read_functions_csv(dir / j.at("offset_file").get<std::string>());
      if (table.functions.size() != 1) throw InvalidArgument("offset file must hold exactly one function");
      offset = table.functions.front();
    }
    Eigen::MatrixXd B = build_B(bs, dict);
    KplModel model{std::move(alpha), std::move(inputs), std::move(dict), kernel, bs, std::move(B),
                   j.at("lambda").get<double>(), std::move(offset)};
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw InvalidArgument("invalid model.json: " + std::string(e.what()));
  }
}

}  // namespace kpl::io
