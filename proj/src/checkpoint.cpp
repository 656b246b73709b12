#include "rsft/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rsft/error.hpp"

namespace rsft {

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

void put_string(std::string& out, const std::string& s) {
    put_u64(out, s.size());
    out += s;
}

class Reader {
public:
    Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string string() {
        const auto n = u64();
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void need(std::uint64_t n) const {
        if (n > remaining()) throw LoadError("checkpoint payload is truncated");
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string encode_checkpoint(const ExtendedState& state, const Generator& generator) {
    if (state.pi_phi.size() != state.phi.size())
        throw UsageError("state arrays have different lengths");
    std::string out = kCheckpointMagic;
    put_u64(out, state.phi.size());
    for (double x : state.phi) put_f64(out, x);
    for (double x : state.pi_phi) put_f64(out, x);
    put_f64(out, state.s);
    put_f64(out, state.pi_s);
    put_f64(out, state.s0);
    put_u64(out, state.step_count);
    put_f64(out, state.lambda);
    put_string(out, kGeneratorId);
    std::ostringstream gen_text;
    gen_text << generator;
    put_string(out, gen_text.str());
    put_u64(out, fnv1a(out));
    return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
    const std::string_view magic = kCheckpointMagic;
    if (bytes.size() < magic.size() || bytes.compare(0, magic.size(), magic) != 0) {
        const auto eol = bytes.find('\n');
        if (bytes.compare(0, 10, "RSFT-CKPT ") == 0 && eol != std::string::npos)
            throw LoadError("unsupported checkpoint version '" + bytes.substr(10, eol - 10) + "'");
        throw LoadError("not a checkpoint file");
    }
    if (bytes.size() < magic.size() + 8) throw LoadError("checkpoint payload is truncated");
    const std::string_view body(bytes.data(), bytes.size() - 8);
    Reader tail(std::string_view(bytes).substr(bytes.size() - 8));

    Reader r(body.substr(magic.size()));
    Checkpoint c;
    const auto n = r.u64();
    if (n > r.remaining() / 16) throw LoadError("checkpoint payload is truncated");
    c.state.phi.resize(n);
    c.state.pi_phi.resize(n);
    for (auto& x : c.state.phi) x = r.f64();
    for (auto& x : c.state.pi_phi) x = r.f64();
    c.state.s = r.f64();
    c.state.pi_s = r.f64();
    c.state.s0 = r.f64();
    c.state.step_count = r.u64();
    c.state.lambda = r.f64();
    const auto id = r.string();
    const auto gen_text = r.string();
    if (r.remaining() != 0) throw LoadError("checkpoint has trailing bytes");
    if (fnv1a(body) != tail.u64()) throw LoadError("checkpoint checksum mismatch");
    if (id != kGeneratorId) throw LoadError("checkpoint uses generator '" + id + "'");
    std::istringstream in(gen_text);
    in >> c.generator;
    if (!in) throw LoadError("checkpoint generator state is malformed");
    if (!(c.state.s > 0.0)) throw LoadError("checkpoint has nonpositive s");
    return c;
}

void write_checkpoint(const ExtendedState& state, const Generator& generator,
                      const std::string& path) {
    const auto bytes = encode_checkpoint(state, generator);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write checkpoint '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("failed writing checkpoint '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place: " + ec.message());
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_checkpoint(buffer.str());
}

} // namespace rsft
