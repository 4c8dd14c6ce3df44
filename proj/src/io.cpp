#include "tucker/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tucker/errors.hpp"

namespace tucker::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary tensor IO assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'T', 'K', 'R', '1'};

Dims dims_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw DimensionError("\"dims\" must be an array of three integers");
    Dims d{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto v = j.at(i).get<long long>();
        if (v <= 0) throw DimensionError("tensor dims must be positive");
        d[i] = static_cast<std::size_t>(v);
    }
    return d;
}

}  // namespace

json tensor_to_json(const Tensor3& t) {
    json j;
    j["dims"] = {t.dim(1), t.dim(2), t.dim(3)};
    j["data"] = std::vector<double>(t.data().begin(), t.data().end());
    return j;
}

Tensor3 tensor_from_json(const json& j) {
    const Dims d = dims_from_json(j.at("dims"));
    auto data = j.at("data").get<std::vector<double>>();
    return Tensor3(d, std::move(data));
}

void write_tensor_binary(std::ostream& out, const Tensor3& t) {
    out.write(kMagic.data(), kMagic.size());
    for (int m = 1; m <= 3; ++m) {
        const std::uint64_t v = t.dim(m);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed writing binary tensor");
}

Tensor3 read_tensor_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw std::runtime_error("not a TKR1 tensor file");
    Dims d{};
    for (auto& v : d) {
        std::uint64_t x = 0;
        in.read(reinterpret_cast<char*>(&x), sizeof x);
        if (!in || x == 0) throw DimensionError("binary tensor header is truncated or has a zero dim");
        v = static_cast<std::size_t>(x);
    }
    const std::size_t n = d[0] * d[1] * d[2];
    std::vector<double> data(n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != n * sizeof(double)) {
        throw DimensionError("binary tensor payload shorter than dims require");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DimensionError("binary tensor payload longer than dims require");
    }
    return Tensor3(d, std::move(data));
}

Tensor3 load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor file " + path.string());
    std::array<char, 4> head{};
    in.read(head.data(), head.size());
    in.clear();
    in.seekg(0);
    if (head == kMagic) return read_tensor_binary(in);
    return tensor_from_json(json::parse(in));
}

void save_tensor(const std::filesystem::path& path, const Tensor3& t, const json& extra) {
    if (path.extension() == ".tkr") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_tensor_binary(out, t);
        return;
    }
    json j = tensor_to_json(t);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    write_text(path, dump(j) + "\n");
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DimensionError("matrix must be a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols) throw DimensionError("ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

json factor_point_to_json(const FactorPoint& p) {
    json j;
    j["r"] = p.rank();
    j["d"] = p.dim();
    j["S"] = tensor_to_json(p.S);
    j["A"] = matrix_to_json(p.A);
    j["B"] = matrix_to_json(p.B);
    j["C"] = matrix_to_json(p.C);
    return j;
}

FactorPoint factor_point_from_json(const json& j) {
    FactorPoint p(tensor_from_json(j.at("S")), matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                  matrix_from_json(j.at("C")));
    if (j.contains("r") && j.at("r").get<std::size_t>() != p.rank()) throw DimensionError("\"r\" disagrees with S");
    if (j.contains("d") && j.at("d").get<std::size_t>() != p.dim()) throw DimensionError("\"d\" disagrees with factors");
    return p;
}

void save_factor_point(const std::filesystem::path& path, const FactorPoint& p) {
    write_text(path, dump(factor_point_to_json(p)) + "\n");
}

FactorPoint load_factor_point(const std::filesystem::path& path) {
    return factor_point_from_json(json::parse(read_text(path)));
}

json trace_record_to_json(const TraceRecord& rec, bool include_timing) {
    json j;
    j["iteration"] = rec.iteration;
    j["f"] = rec.f;
    j["L"] = rec.L;
    j["R"] = rec.R;
    j["grad_norm"] = rec.grad_norm;
    j["min_curvature"] = rec.min_curvature ? json(*rec.min_curvature) : json(nullptr);
    j["step_kind"] = rec.step_kind;
    j["step_size"] = rec.step_size;
    j["improvement"] = rec.improvement;
    j["predicted_f"] = rec.predicted_f ? json(*rec.predicted_f) : json(nullptr);
    j["seed"] = rec.seed;
    if (include_timing) j["wall_time_s"] = rec.wall_time_s;
    return j;
}

void write_trace_jsonl(std::ostream& out, const SearchTrace& trace, bool include_timing) {
    for (const TraceRecord& rec : trace.records) out << dump(trace_record_to_json(rec, include_timing)) << '\n';
}

SearchTrace read_trace_jsonl(std::istream& in) {
    SearchTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        TraceRecord rec;
        rec.iteration = j.at("iteration").get<long>();
        rec.f = j.at("f").get<double>();
        rec.L = j.at("L").get<double>();
        rec.R = j.at("R").get<double>();
        rec.grad_norm = j.at("grad_norm").get<double>();
        if (!j.at("min_curvature").is_null()) rec.min_curvature = j.at("min_curvature").get<double>();
        rec.step_kind = j.at("step_kind").get<std::string>();
        rec.step_size = j.at("step_size").get<double>();
        rec.improvement = j.at("improvement").get<double>();
        if (!j.at("predicted_f").is_null()) rec.predicted_f = j.at("predicted_f").get<double>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("wall_time_s")) rec.wall_time_s = j.at("wall_time_s").get<double>();
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

json thresholds_to_json(const Thresholds& th) {
    return json{{"lambda", th.lambda}, {"K", th.K},           {"tau", th.tau},       {"gamma", th.gamma},
                {"sigma", th.sigma},   {"kappa0", th.kappa0}, {"kappa1", th.kappa1}, {"kappa2", th.kappa2},
                {"kappa3", th.kappa3}, {"tau1", th.tau1},     {"tau2", th.tau2},     {"epsilon", th.epsilon},
                {"c_gamma", th.c_gamma}, {"consistent", th.consistent}};
}

std::string dump(const json& j, int indent) { return j.dump(indent); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tucker::io
