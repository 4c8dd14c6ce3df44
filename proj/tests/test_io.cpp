#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "tucker/errors.hpp"
#include "tucker/io.hpp"

using namespace tucker;
using namespace tucker::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("tucker_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Io, TensorJsonRoundTripIsExact) {
    Rng rng(1);
    const Tensor3 t = Tensor3::random_normal({2, 3, 4}, rng);
    const std::string text = io::dump(io::tensor_to_json(t));
    EXPECT_EQ(io::tensor_from_json(io::json::parse(text)), t);
}

TEST(Io, TensorJsonRejectsBadDims) {
    EXPECT_THROW(io::tensor_from_json(io::json::parse(R"({"dims":[2,2],"data":[1,2,3,4]})")), DimensionError);
    EXPECT_THROW(io::tensor_from_json(io::json::parse(R"({"dims":[1,1,2],"data":[1]})")), DimensionError);
}

TEST(Io, BinaryRoundTrip) {
    Rng rng(2);
    const Tensor3 t = Tensor3::random_normal({3, 2, 2}, rng);
    std::stringstream ss;
    io::write_tensor_binary(ss, t);
    EXPECT_EQ(ss.str().substr(0, 4), "TKR1");
    EXPECT_EQ(ss.str().size(), 4 + 3 * 8 + 12 * 8u);
    EXPECT_EQ(io::read_tensor_binary(ss), t);
}

TEST(Io, BinaryRejectsLengthMismatch) {
    Rng rng(3);
    std::stringstream ss;
    io::write_tensor_binary(ss, Tensor3::random_normal({2, 2, 2}, rng));
    const std::string full = ss.str();
    std::stringstream shorter(full.substr(0, full.size() - 8));
    EXPECT_THROW(io::read_tensor_binary(shorter), DimensionError);
    std::stringstream longer(full + std::string(8, '\0'));
    EXPECT_THROW(io::read_tensor_binary(longer), DimensionError);
    std::stringstream junk("XXXX");
    EXPECT_THROW(io::read_tensor_binary(junk), std::runtime_error);
}

TEST(Io, LoadDetectsFormat) {
    const fs::path dir = temp_dir("detect");
    Rng rng(4);
    const Tensor3 t = Tensor3::random_normal({2, 2, 2}, rng);
    io::save_tensor(dir / "a.tkr", t);
    io::save_tensor(dir / "b.json", t, {{"metadata", {{"seed", 4}}}});
    EXPECT_EQ(io::load_tensor(dir / "a.tkr"), t);
    EXPECT_EQ(io::load_tensor(dir / "b.json"), t);
    EXPECT_EQ(io::json::parse(io::read_text(dir / "b.json"))["metadata"]["seed"], 4);
    EXPECT_THROW(io::load_tensor(dir / "missing.json"), std::runtime_error);
}

TEST(Io, FactorPointRoundTrip) {
    const fs::path dir = temp_dir("factors");
    Rng rng(5);
    const FactorPoint p = FactorPoint::random_normal(2, 3, 1.0, rng);
    io::save_factor_point(dir / "f.json", p);
    EXPECT_EQ(io::load_factor_point(dir / "f.json"), p);
    io::json j = io::factor_point_to_json(p);
    j["r"] = 3;
    EXPECT_THROW(io::factor_point_from_json(j), DimensionError);
}

TEST(Io, TraceRoundTrip) {
    SearchTrace tr;
    TraceRecord a;
    a.iteration = 0;
    a.f = 0.5;
    a.L = 0.4;
    a.R = 25.0;
    a.grad_norm = 1e-3;
    a.step_kind = "gradient";
    a.step_size = 0.01;
    a.improvement = 1e-4;
    a.seed = 18446744073709551615ULL;
    a.wall_time_s = 1.5;
    TraceRecord b = a;
    b.iteration = 1;
    b.min_curvature = -1e-3;
    b.predicted_f = 0.25;
    b.step_kind = "sampled(2,2,2)";
    tr.records = {a, b};
    std::stringstream ss;
    io::write_trace_jsonl(ss, tr);
    EXPECT_EQ(ss.str().find("wall_time"), std::string::npos);
    const SearchTrace back = io::read_trace_jsonl(ss);
    ASSERT_EQ(back.records.size(), 2u);
    EXPECT_EQ(back.records[0].seed, a.seed);
    EXPECT_FALSE(back.records[0].min_curvature.has_value());
    EXPECT_EQ(*back.records[1].predicted_f, 0.25);
    EXPECT_EQ(back.records[1].step_kind, "sampled(2,2,2)");
    std::stringstream timed;
    io::write_trace_jsonl(timed, tr, true);
    EXPECT_NE(timed.str().find("wall_time_s"), std::string::npos);
}

TEST(Io, DumpIsDeterministic) {
    const io::json j = {{"b", 0.1}, {"a", 1.0 / 3.0}};
    EXPECT_EQ(io::dump(j), io::dump(io::json::parse(io::dump(j))));
    EXPECT_EQ(io::dump(j), R"({"a":0.3333333333333333,"b":0.1})");
}
