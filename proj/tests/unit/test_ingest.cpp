#include "c_toolchain.hpp"
#include "generators.hpp"

#include "tpnn/ingest.hpp"
#include "tpnn/zoo.hpp"

#include <doctest.h>

#include <bit>
#include <cstring>
#include <fstream>

using namespace tpnn;
using tpnn::testing::Rng;

namespace {

const std::filesystem::path kModels = TPNN_MODELS_DIR;

std::span<const std::byte> as_bytes(const std::string& s) {
    return std::as_bytes(std::span(s.data(), s.size()));
}

template <class F>
ErrorCode code_of(F&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::EmptyNetwork;
}

// XOR manifest text with one field replaced by raw JSON.
std::string xor_manifest_with(const std::string& key, const std::string& raw_value) {
    std::string text = save_model(zoo::xor_network()).manifest;
    const auto at = text.find("\"" + key + "\"");
    REQUIRE(at != std::string::npos);
    const auto colon = text.find(':', at);
    auto end = colon + 1;
    int depth = 0;
    for (; end < text.size(); ++end) {
        const char c = text[end];
        if (c == '[' || c == '{') ++depth;
        if (c == ']' || c == '}') {
            if (depth == 0) break;
            --depth;
        }
        if (c == ',' && depth == 0) break;
    }
    return text.substr(0, colon + 1) + " " + raw_value + text.substr(end);
}

} // namespace

TEST_CASE("sha256_hex known digests") {
    CHECK(sha256_hex({}) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex(as_bytes("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("XOR fixture loads") {
    const auto blob = read_file_bytes(kModels / "xor" / "xor.bin");
    CHECK(blob.size() == 36);
    const Network net = load_model(read_file_text(kModels / "xor" / "xor.json"), blob);
    CHECK(count_connections(net) == 9);
    CHECK(identical(net.ir(), zoo::xor_network().ir()));
    CHECK(identical(load_model_files(kModels / "xor" / "xor.json").ir(), net.ir()));
}

TEST_CASE("blob problems") {
    const SavedModel saved = save_model(zoo::xor_network());
    SUBCASE("truncated to 32 bytes") {
        const std::span<const std::byte> cut(saved.weights.data(), 32);
        try {
            load_model(saved.manifest, cut);
            FAIL("no error");
        } catch (const WeightsLengthError& e) {
            CHECK(e.code() == ErrorCode::WeightsLengthMismatch);
            CHECK(e.expected() == 36);
            CHECK(e.actual() == 32);
        }
    }
    SUBCASE("one extra byte") {
        auto longer = saved.weights;
        longer.push_back(std::byte{0});
        CHECK(code_of([&] { load_model(saved.manifest, longer); }) == ErrorCode::WeightsLengthMismatch);
    }
    SUBCASE("every single flipped byte is caught") {
        for (std::size_t i = 0; i < saved.weights.size(); ++i) {
            auto bad = saved.weights;
            bad[i] ^= std::byte{0x01};
            CHECK(code_of([&] { load_model(saved.manifest, bad); }) == ErrorCode::ChecksumMismatch);
        }
    }
}

TEST_CASE("manifest problems") {
    const auto blob = save_model(zoo::xor_network()).weights;
    auto load = [&](const std::string& manifest) { return code_of([&] { load_model(manifest, blob); }); };

    CHECK(load("") == ErrorCode::ManifestSyntax);
    CHECK(load("{\"format_version\": 1,") == ErrorCode::ManifestSyntax);
    CHECK(load("[1, 2]") == ErrorCode::ManifestSyntax);
    CHECK(load("{}") == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("format_version", "2")) == ErrorCode::UnsupportedVersion);
    CHECK(load(xor_manifest_with("format_version", "\"1\"")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("name", "\"\"")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("input_shape", "[]")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("input_shape", "[2, 0]")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("input_shape", "[-2]")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("weights_checksum", "\"ABC\"")) == ErrorCode::ManifestSyntax);
    CHECK(load(xor_manifest_with("name", "\"xor\", \"comment\": \"hi\"")) == ErrorCode::ManifestSyntax);

    const std::string dense2 = R"({"kind": "dense", "activation": "linear", "units": 1})";
    auto with_layers = [&](const std::string& first) {
        return xor_manifest_with("layers", "[" + first + ", " + dense2 + "]");
    };
    CHECK(load(with_layers(R"({"kind": "lstm", "activation": "relu", "units": 2})")) == ErrorCode::UnsupportedLayer);
    CHECK(load(with_layers(R"({"kind": "dense", "activation": "softmax", "units": 2})")) ==
          ErrorCode::UnsupportedActivation);
    CHECK(load(with_layers(R"({"kind": "dense", "activation": "relu", "units": 2, "extra": 1})")) ==
          ErrorCode::ManifestSyntax);
    CHECK(load(with_layers(R"({"kind": "dense", "activation": "relu"})")) == ErrorCode::ManifestSyntax);
    CHECK(load(with_layers(R"({"kind": "dense", "activation": "relu", "units": 2.5})")) ==
          ErrorCode::ManifestSyntax);
    CHECK(load(with_layers(R"({"kind": "flatten", "activation": "relu"})")) == ErrorCode::UnsupportedActivation);
    // Well-formed descriptors that do not fit the shape chain.
    CHECK(load(with_layers(R"({"kind": "maxpool2d", "activation": "linear", "window": [2, 2], "stride": [2, 2]})")) ==
          ErrorCode::ShapeMismatch);
    // The original descriptor restored parses again.
    CHECK_NOTHROW(load_model(with_layers(R"({"kind": "dense", "activation": "relu", "units": 2})"), blob));
}

TEST_CASE("manifest text round-trips") {
    const ModelManifest m = parse_manifest(save_model(zoo::lenet5(4)).manifest);
    const ModelManifest again = parse_manifest(write_manifest(m));
    CHECK(again.name == m.name);
    CHECK(again.input_shape == m.input_shape);
    CHECK(again.layers == m.layers);
    CHECK(again.weights_file == m.weights_file);
    CHECK(again.weights_checksum == m.weights_checksum);
    CHECK(write_manifest(again) == write_manifest(m));
}

TEST_CASE("save/load examples") {
    SUBCASE("XOR") {
        const Network net = zoo::xor_network();
        const SavedModel s = save_model(net);
        CHECK(s.weights.size() == 36);
        CHECK(identical(load_model(s.manifest, s.weights).ir(), net.ir()));
    }
    SUBCASE("smallest subnormal and a signalling NaN survive") {
        NetworkIR ir = zoo::xor_network().ir();
        ir.parameters[0] = std::bit_cast<float>(std::uint32_t{1});
        ir.parameters[3] = std::bit_cast<float>(std::uint32_t{0x7fa00001});
        const Network net = validate(ir);
        const SavedModel s = save_model(net);
        const Network back = load_model(s.manifest, s.weights);
        CHECK(std::bit_cast<std::uint32_t>(back.parameters()[0]) == 1u);
        CHECK(std::bit_cast<std::uint32_t>(back.parameters()[3]) == 0x7fa00001u);
        CHECK(identical(back.ir(), net.ir()));
    }
    SUBCASE("LeNet-5 layout keeps its parameter count") {
        const SavedModel s = save_model(zoo::lenet5(9));
        CHECK(s.weights.size() == 4 * 61706);
        CHECK(count_connections(load_model(s.manifest, s.weights)) == 61706);
    }
    SUBCASE("blob layout is little-endian, weights before biases") {
        NetworkBuilder b("tiny", TensorShape{{1}});
        b.dense(1, Activation::Linear);
        const SavedModel s = save_model(b.build({1.0f, -2.0f}));
        const std::vector<unsigned char> want{0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
        REQUIRE(s.weights.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) CHECK(static_cast<unsigned char>(s.weights[i]) == want[i]);
    }
}

TEST_CASE("property: round trip is the identity for random architectures and weight bits") {
    Rng rng(8080);
    for (int trial = 0; trial < 300; ++trial) {
        NetworkIR ir = testing::random_architecture(rng).ir();
        for (auto& p : ir.parameters) p = std::bit_cast<float>(rng.bits32());
        const Network net = validate(ir);
        const SavedModel s = save_model(net);
        REQUIRE(s.weights.size() == 4 * count_connections(net));
        const Network back = load_model(s.manifest, s.weights);
        CHECK(identical(back.ir(), net.ir()));
        CHECK(back.shapes() == net.shapes());
    }
}

TEST_CASE("property: a load either fully succeeds or throws Error") {
    Rng rng(616);
    int failures = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const Network net = testing::random_architecture(rng);
        SavedModel s = save_model(net);
        const bool mutate_blob = rng.coin() && !s.weights.empty();
        if (mutate_blob) {
            switch (rng.between(0, 2)) {
            case 0: s.weights[rng.index(s.weights.size())] ^= std::byte{static_cast<unsigned char>(rng.between(1, 255))}; break;
            case 1: s.weights.pop_back(); break;
            default: s.weights.push_back(std::byte{0}); break;
            }
        } else {
            const std::size_t at = rng.index(s.manifest.size());
            s.manifest[at] = static_cast<char>(rng.between(32, 126));
        }
        try {
            const Network back = load_model(s.manifest, s.weights);
            // A surviving manifest edit must still describe a complete network
            // that consumes the whole blob.
            CHECK(check(back.ir()).empty());
            CHECK(back.parameters().size() * 4 == s.weights.size());
            CHECK_FALSE(mutate_blob);
        } catch (const Error&) {
            ++failures;
        } catch (const std::exception& e) {
            FAIL("non-Error exception: " << e.what());
        }
    }
    CHECK(failures > 1000);
}

TEST_CASE("file helpers") {
    testing::TempDir dir;
    const Network net = zoo::f1tenth_standin(5);
    const auto manifest = save_model_files(net, dir.path());
    CHECK(manifest == dir.path() / (net.name() + ".json"));
    CHECK(std::filesystem::exists(dir.path() / (net.name() + ".bin")));
    CHECK(identical(load_model_files(manifest).ir(), net.ir()));

    SUBCASE("explicit weights path") {
        std::filesystem::rename(dir.path() / (net.name() + ".bin"), dir.path() / "elsewhere.bin");
        CHECK(code_of([&] { load_model_files(manifest); }) == ErrorCode::IoFailure);
        CHECK(identical(load_model_files(manifest, dir.path() / "elsewhere.bin").ir(), net.ir()));
    }
    SUBCASE("missing and unreadable inputs") {
        CHECK(code_of([&] { read_file_bytes(dir.path() / "nope.bin"); }) == ErrorCode::IoFailure);
        CHECK(code_of([&] { read_file_text(dir.path() / "nope.json"); }) == ErrorCode::IoFailure);
        CHECK(code_of([&] { load_model_files(dir.path() / "nope.json"); }) == ErrorCode::IoFailure);
        std::ofstream(dir.path() / "plain.txt") << "x";
        CHECK(code_of([&] { save_model_files(net, dir.path() / "plain.txt" / "sub"); }) == ErrorCode::IoFailure);
    }
}
