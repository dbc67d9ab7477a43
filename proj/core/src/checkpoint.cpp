#include "alnf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "alnf/errors.hpp"

namespace alnf {

namespace {

constexpr char kMagic[5] = {'A', 'L', 'N', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class Reader {
public:
    Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(byte()); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    void expect_magic() {
        for (char c : kMagic) {
            if (byte() != static_cast<unsigned char>(c))
                throw BadCheckpoint(path_ + ": bad magic, not an ALNF1 checkpoint");
        }
    }

    void expect_end() const {
        if (pos_ != data_.size()) throw BadCheckpoint(path_ + ": trailing bytes");
    }

private:
    unsigned char byte() {
        if (pos_ >= data_.size()) throw BadCheckpoint(path_ + ": truncated checkpoint");
        return static_cast<unsigned char>(data_[pos_++]);
    }

    std::string data_;
    std::string path_;
    std::size_t pos_ = 0;
};

std::string serialize(std::uint8_t kind, const lm::ModelArch& arch, const Vocabulary& vocab,
                      std::span<const double> params, std::uint64_t config_hash) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    out.push_back(static_cast<char>(kind));
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(vocab.size));
    put_u32(out, static_cast<std::uint32_t>(vocab.bos));
    put_u32(out, static_cast<std::uint32_t>(vocab.eos));
    put_u32(out, static_cast<std::uint32_t>(vocab.pad));
    put_u32(out, static_cast<std::uint32_t>(arch.embed_dim));
    put_u32(out, static_cast<std::uint32_t>(arch.hidden_dim));
    put_u32(out, static_cast<std::uint32_t>(arch.context_window));
    put_u32(out, static_cast<std::uint32_t>(arch.hidden_layers));
    put_u64(out, config_hash);
    put_u64(out, params.size());
    for (double p : params) put_f64(out, p);
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound(path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

struct Header {
    std::uint8_t kind;
    lm::ModelArch arch;
    Vocabulary vocab;
    std::vector<double> params;
};

Header parse(const std::filesystem::path& path) {
    Reader r(read_file(path), path.string());
    r.expect_magic();
    Header h;
    h.kind = r.u8();
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw BadCheckpoint(path.string() + ": unsupported version " + std::to_string(version));
    h.vocab.size = static_cast<int>(r.u32());
    h.vocab.bos = static_cast<Token>(r.u32());
    h.vocab.eos = static_cast<Token>(r.u32());
    h.vocab.pad = static_cast<Token>(r.u32());
    h.arch.vocab_size = h.vocab.size;
    h.arch.embed_dim = static_cast<int>(r.u32());
    h.arch.hidden_dim = static_cast<int>(r.u32());
    h.arch.context_window = static_cast<int>(r.u32());
    h.arch.hidden_layers = static_cast<int>(r.u32());
    r.u64();  // config hash, informational
    const std::uint64_t count = r.u64();
    const std::size_t expected = h.kind == 0 ? h.arch.policy_param_count()
                                             : h.arch.reward_param_count();
    if (count != expected)
        throw BadCheckpoint(path.string() + ": parameter count " + std::to_string(count) +
                            " does not match architecture (expected " +
                            std::to_string(expected) + ")");
    h.params.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) h.params[i] = r.f64();
    r.expect_end();
    return h;
}

}  // namespace

void save_policy(const std::filesystem::path& path, const lm::PolicyModel& model,
                 std::uint64_t config_hash) {
    write_file(path, serialize(0, model.arch, model.vocab, model.params, config_hash));
}

void save_reward(const std::filesystem::path& path, const reward::RewardModel& model,
                 std::uint64_t config_hash) {
    write_file(path, serialize(1, model.arch, model.vocab, model.params, config_hash));
}

lm::PolicyModel load_policy(const std::filesystem::path& path) {
    Header h = parse(path);
    if (h.kind != 0) throw BadCheckpoint(path.string() + ": not a policy checkpoint");
    return lm::PolicyModel{h.arch, h.vocab, std::move(h.params)};
}

reward::RewardModel load_reward(const std::filesystem::path& path) {
    Header h = parse(path);
    if (h.kind != 1) throw BadCheckpoint(path.string() + ": not a reward checkpoint");
    return reward::RewardModel{h.arch, h.vocab, std::move(h.params)};
}

}  // namespace alnf
