// Copyright 2026 The QA3C Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "qa3c/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qa3c/errors.hpp"

namespace qa3c::policy {

using nlohmann::json;

std::string serialize_checkpoint(const PolicyParameters &params) {
    const auto &s = params.shape;
    json doc;
    doc["format"] = "qa3c-checkpoint";
    doc["version"] = kCheckpointVersion;
    doc["config_hash"] = structural_hash(s);
    doc["shape"] = {{"k", s.k},
                    {"h1", s.h1},
                    {"h2", s.h2},
                    {"n_qubits", s.n_qubits},
                    {"n_layers", s.n_layers},
                    {"bottleneck", std::string(to_string(s.bottleneck))},
                    {"band_width", s.band_width}};
    doc["tau"] = params.tau;
    json arrays = json::array();
    params.for_each([&](std::string_view name, const Eigen::MatrixXd &m) {
        std::vector<double> data(m.data(), m.data() + m.size());
        arrays.push_back({{"name", std::string(name)},
                          {"rows", m.rows()},
                          {"cols", m.cols()},
                          {"data", data}});
    });
    doc["arrays"] = std::move(arrays);
    return doc.dump(1) + "\n";
}

Checkpoint deserialize_checkpoint(const std::string &text,
                                  const std::string &source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ParseError(source, 0, e.what());
    }
    try {
        if (doc.at("format") != "qa3c-checkpoint")
            throw DataValidationError(source + ": not a qa3c checkpoint");
        Checkpoint ck;
        ck.version = doc.at("version").get<int>();
        if (ck.version != kCheckpointVersion)
            throw IncompatibleCheckpointError(
                source + ": unsupported checkpoint version " +
                std::to_string(ck.version));
        ck.config_hash = doc.at("config_hash").get<std::string>();
        const auto &js = doc.at("shape");
        NetworkShape shape;
        shape.k = js.at("k").get<std::size_t>();
        shape.h1 = js.at("h1").get<std::size_t>();
        shape.h2 = js.at("h2").get<std::size_t>();
        shape.n_qubits = js.at("n_qubits").get<std::size_t>();
        shape.n_layers = js.at("n_layers").get<std::size_t>();
        shape.bottleneck = parse_bottleneck(js.at("bottleneck").get<std::string>());
        shape.band_width = js.at("band_width").get<std::size_t>();
        if (structural_hash(shape) != ck.config_hash)
            throw IncompatibleCheckpointError(
                source + ": stored hash does not match stored shape");
        ck.params = PolicyParameters::zeros(shape, doc.at("tau").get<double>());

        const auto &arrays = doc.at("arrays");
        std::size_t i = 0;
        ck.params.for_each([&](std::string_view name, Eigen::MatrixXd &m) {
            if (i >= arrays.size())
                throw DataValidationError(source + ": missing array " +
                                          std::string(name));
            const auto &a = arrays[i++];
            if (a.at("name").get<std::string>() != name ||
                a.at("rows").get<Eigen::Index>() != m.rows() ||
                a.at("cols").get<Eigen::Index>() != m.cols())
                throw DataValidationError(source + ": array " + std::string(name) +
                                          " has unexpected name or shape");
            const auto data = a.at("data").get<std::vector<double>>();
            if (static_cast<Eigen::Index>(data.size()) != m.size())
                throw DataValidationError(source + ": array " + std::string(name) +
                                          " has wrong element count");
            std::copy(data.begin(), data.end(), m.data());
        });
        if (i != arrays.size())
            throw DataValidationError(source + ": unexpected extra arrays");
        return ck;
    } catch (const json::exception &e) {
        throw ParseError(source, 0, e.what());
    }
}

void save_checkpoint(const std::filesystem::path &path,
                     const PolicyParameters &params) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write checkpoint " + path.string());
    out << serialize_checkpoint(params);
    if (!out)
        throw DataError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("checkpoint not found: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str(), path.string());
}

} // namespace qa3c::policy
