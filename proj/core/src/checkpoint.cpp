#include "hmarl/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hmarl/errors.hpp"
#include "json.hpp"

namespace hmarl {
namespace {

constexpr std::array<char, 8> kMagic = {'H', 'M', 'A', 'R', 'L', 'C', 'K', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) fail(ErrorKind::Checkpoint, "file is truncated");
    }
    std::uint64_t uint(int bytes) {
        need(static_cast<std::size_t>(bytes));
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        pos_ += static_cast<std::size_t>(bytes);
        return v;
    }
    std::string bytes(std::size_t n) {
        need(n);
        auto s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    double f64() {
        const std::uint64_t bits = uint(8);
        double d;
        std::memcpy(&d, &bits, sizeof d);
        return d;
    }
    bool at_end() const { return pos_ == data_.size(); }

private:
    std::string data_;
    std::size_t pos_ = 0;
};

std::vector<int> layer_sizes(const std::vector<Dense>& layers) {
    std::vector<int> s;
    for (const auto& l : layers) s.push_back(l.out);
    return s;
}

}  // namespace

void save_checkpoint(const PolicyNet& net, const std::filesystem::path& path) {
    nlohmann::ordered_json header;
    header["format"] = "hmarl-policy";
    header["role"] = std::string(to_string(net.role));
    header["head_spec"] = net.head_spec;
    header["input_width"] = net.input_width();
    header["trunk_layers"] = layer_sizes(net.trunk->layers);
    header["head_layers"] = layer_sizes(net.head_layers);
    header["frozen"] = net.frozen;
    header["tags"] = net.tags;
    header["trunk_digest"] = trunk_digest(*net.trunk);
    const std::string header_text = header.dump();

    std::string out(kMagic.begin(), kMagic.end());
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(header_text.size()));
    out += header_text;
    std::uint64_t count = 0;
    for (auto b : parameter_blocks(net)) count += b.size();
    put_u64(out, count);
    for (auto b : parameter_blocks(net)) {
        for (double x : b) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            put_u64(out, bits);
        }
    }

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::Checkpoint, "cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) fail(ErrorKind::Checkpoint, "write failed for " + path.string());
}

PolicyNet load_checkpoint(const std::filesystem::path& path, std::optional<PolicyRole> expected_role) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::MissingArtifact, "checkpoint not found: " + path.string());
    Reader r(std::string(std::istreambuf_iterator<char>(f), {}));

    const auto magic = r.bytes(kMagic.size());
    if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) fail(ErrorKind::Checkpoint, "bad magic bytes");
    const auto version = r.uint(4);
    if (version != kCheckpointVersion)
        fail(ErrorKind::Checkpoint, "unsupported checkpoint version " + std::to_string(version));
    const auto header_len = r.uint(4);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.bytes(header_len));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Checkpoint, std::string("malformed header: ") + e.what());
    }

    PolicyNet net;
    std::vector<int> trunk_sizes, head_sizes;
    int input_width = 0;
    try {
        if (header.at("format").get<std::string>() != "hmarl-policy") fail(ErrorKind::Checkpoint, "not a policy checkpoint");
        net.role = policy_role_from_string(header.at("role").get<std::string>());
        net.head_spec = header.at("head_spec").get<std::vector<int>>();
        input_width = header.at("input_width").get<int>();
        trunk_sizes = header.at("trunk_layers").get<std::vector<int>>();
        head_sizes = header.at("head_layers").get<std::vector<int>>();
        net.frozen = header.at("frozen").get<bool>();
        net.tags = header.at("tags").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Checkpoint, std::string("malformed header: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::Checkpoint, e.what());
    }
    if (expected_role && *expected_role != net.role)
        fail(ErrorKind::Checkpoint, "role mismatch: file holds '" + std::string(to_string(net.role)) + "', expected '" +
                                        std::string(to_string(*expected_role)) + "'");
    if (input_width <= 0 || trunk_sizes.empty()) fail(ErrorKind::Checkpoint, "invalid layer sizes");

    net.trunk = std::make_shared<Trunk>();
    int in = input_width;
    for (int s : trunk_sizes) {
        if (s <= 0) fail(ErrorKind::Checkpoint, "invalid layer sizes");
        net.trunk->layers.emplace_back(in, s);
        in = s;
    }
    for (int s : head_sizes) {
        if (s <= 0) fail(ErrorKind::Checkpoint, "invalid layer sizes");
        net.head_layers.emplace_back(in, s);
        in = s;
    }
    int logits = 0;
    for (int k : net.head_spec) {
        if (k <= 0) fail(ErrorKind::Checkpoint, "invalid head spec");
        logits += k;
    }
    net.policy_out = Dense(in, logits);
    net.value_out = Dense(in, 1);

    std::uint64_t expected = 0;
    for (auto b : parameter_blocks(net)) expected += b.size();
    const auto count = r.uint(8);
    if (count != expected) fail(ErrorKind::Checkpoint, "parameter count does not match header");
    for (auto b : parameter_blocks(net))
        for (auto& x : b) x = r.f64();
    if (!r.at_end()) fail(ErrorKind::Checkpoint, "trailing bytes after parameter blob");
    return net;
}

std::filesystem::path controller_path(const std::filesystem::path& dir, PolicyRole role) {
    return dir / (std::string(to_string(role)) + ".ckpt");
}

LowLevelPolicySet load_controller_set(const std::filesystem::path& dir) {
    LowLevelPolicySet set;
    for (auto role : {PolicyRole::Attack, PolicyRole::Engage, PolicyRole::Defend}) {
        const auto p = controller_path(dir, role);
        if (!std::filesystem::exists(p)) fail(ErrorKind::MissingArtifact, "missing controller " + p.string());
        set.nets.push_back(load_checkpoint(p, role));
    }
    set.trunk = set.nets.front().trunk;
    for (auto& net : set.nets) {
        if (*net.trunk == *set.trunk) net.trunk = set.trunk;
    }
    return set;
}

}  // namespace hmarl
