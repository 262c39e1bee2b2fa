#include "semidiff/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semidiff {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'C', 'K', 'P', 'T', '0', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
    return v;
}

}  // namespace

std::string checkpoint_bytes(const ScoreModel& model, const std::string& id) {
    const auto& spec = model.spec();
    nlohmann::json header = {
        {"family", to_string(spec.family)},
        {"d_x", spec.d_x},
        {"d_y", spec.d_y},
        {"widths", spec.widths},
        {"activation", "tanh"},
        {"m0", spec.caps.m0},
        {"m1", spec.caps.m1},
        {"init_seed", spec.init_seed},
        {"init_scale", spec.init_scale},
        {"n_params", model.params().size()},
        {"id", id},
    };
    const std::string h = header.dump();
    std::string out(kMagic, 8);
    put_u64(out, h.size());
    out += h;
    for (Eigen::Index i = 0; i < model.params().size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(model.params()(i)));
    return out;
}

ScoreModel checkpoint_from_bytes(const std::string& bytes, std::string* id) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const std::uint64_t hlen = get_u64(bytes, 8);
    if (bytes.size() < 16 + hlen) throw std::runtime_error("checkpoint: truncated header");
    const auto header = nlohmann::json::parse(bytes.substr(16, hlen));
    ModelClassSpec spec;
    spec.family = model_family_from_string(header.at("family").get<std::string>());
    spec.d_x = header.at("d_x").get<int>();
    spec.d_y = header.at("d_y").get<int>();
    spec.widths = header.at("widths").get<std::vector<int>>();
    spec.caps.m0 = header.at("m0").get<double>();
    spec.caps.m1 = header.at("m1").get<double>();
    spec.init_seed = header.at("init_seed").get<std::uint64_t>();
    spec.init_scale = header.at("init_scale").get<double>();
    const auto n = header.at("n_params").get<std::size_t>();
    if (bytes.size() != 16 + hlen + 8 * n) throw std::runtime_error("checkpoint: parameter block size mismatch");
    Vec p(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) p(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(get_u64(bytes, 16 + hlen + 8 * i));
    if (id) *id = header.value("id", std::string{});
    return ScoreModel(spec, std::move(p));
}

void save_checkpoint(const ScoreModel& model, const std::filesystem::path& path, const std::string& id) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
    const std::string bytes = checkpoint_bytes(model, id);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ScoreModel load_checkpoint(const std::filesystem::path& path, std::string* id) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return checkpoint_from_bytes(ss.str(), id);
}

}  // namespace semidiff
