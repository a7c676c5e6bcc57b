#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fgcn/csv.hpp"
#include "fgcn/descriptor.hpp"
#include "fgcn/errors.hpp"
#include "fgcn/gcn.hpp"
#include "fgcn/matrix.hpp"
#include "fgcn/regressor.hpp"

namespace fgcn {

// Self-describing model container: a text manifest (key = value lines)
// followed by named weight blocks with explicit shapes, stored as
// little-endian 64-bit floats. Save -> load -> save is byte-identical.
class ModelArtifact {
  public:
    static constexpr const char* kMagic = "FGCN-ARTIFACT v1";

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : manifest_)
            if (k == key) {
                v = value;
                return;
            }
        manifest_.emplace_back(key, value);
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : manifest_)
            if (k == key) return v;
        throw config_error("artifact manifest is missing '" + key + "'");
    }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : manifest_)
            if (k == key) return true;
        return false;
    }

    std::uint64_t get_u64(const std::string& key) const { return std::stoull(get(key)); }
    double get_f64(const std::string& key) const { return parse_double(get(key)); }

    void add_block(const std::string& name, Matrix m) { blocks_.emplace_back(name, std::move(m)); }

    const Matrix& block(const std::string& name) const {
        for (const auto& [n, m] : blocks_)
            if (n == name) return m;
        throw config_error("artifact is missing weight block '" + name + "'");
    }

    const std::vector<std::pair<std::string, std::string>>& manifest() const { return manifest_; }
    const std::vector<std::pair<std::string, Matrix>>& blocks() const { return blocks_; }

    std::string serialize() const {
        std::string out;
        out += kMagic;
        out += '\n';
        out += "manifest " + std::to_string(manifest_.size()) + "\n";
        for (const auto& [k, v] : manifest_) out += k + " = " + v + "\n";
        out += "blocks " + std::to_string(blocks_.size()) + "\n";
        for (const auto& [name, m] : blocks_) {
            out += "block " + name + " " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
            append_le_doubles(out, m);
            out += '\n';
        }
        out += "end\n";
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot write '" + path + "'");
        const std::string bytes = serialize();
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw io_error("write failed for '" + path + "'");
    }

    static ModelArtifact deserialize(const std::string& bytes) {
        Cursor cur{bytes, 0};
        if (cur.line() != kMagic) throw parse_error("not a model artifact (bad magic)");

        ModelArtifact art;
        const std::string mh = cur.line();
        if (mh.rfind("manifest ", 0) != 0) throw parse_error("artifact: expected manifest header");
        const std::size_t n_manifest = std::stoull(mh.substr(9));
        for (std::size_t i = 0; i < n_manifest; ++i) {
            const std::string line = cur.line();
            const std::size_t sep = line.find(" = ");
            if (sep == std::string::npos) throw parse_error("artifact: bad manifest line '" + line + "'");
            art.manifest_.emplace_back(line.substr(0, sep), line.substr(sep + 3));
        }

        const std::string bh = cur.line();
        if (bh.rfind("blocks ", 0) != 0) throw parse_error("artifact: expected blocks header");
        const std::size_t n_blocks = std::stoull(bh.substr(7));
        for (std::size_t i = 0; i < n_blocks; ++i) {
            const std::string line = cur.line();
            if (line.rfind("block ", 0) != 0) throw parse_error("artifact: expected block header");
            std::size_t p1 = line.find(' ', 6);
            std::size_t p2 = line.find(' ', p1 + 1);
            if (p1 == std::string::npos || p2 == std::string::npos)
                throw parse_error("artifact: bad block header '" + line + "'");
            const std::string name = line.substr(6, p1 - 6);
            const std::size_t rows = std::stoull(line.substr(p1 + 1, p2 - p1 - 1));
            const std::size_t cols = std::stoull(line.substr(p2 + 1));
            Matrix m(rows, cols);
            cur.read_le_doubles(m);
            if (cur.line() != "") throw parse_error("artifact: missing block terminator after '" + name + "'");
            art.blocks_.emplace_back(name, std::move(m));
        }
        if (cur.line() != "end") throw parse_error("artifact: missing end marker");
        return art;
    }

    static ModelArtifact load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw io_error("cannot open '" + path + "'");
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return deserialize(bytes);
    }

  private:
    struct Cursor {
        const std::string& bytes;
        std::size_t pos;

        std::string line() {
            const std::size_t nl = bytes.find('\n', pos);
            if (nl == std::string::npos) throw parse_error("artifact: unexpected end of file");
            std::string out = bytes.substr(pos, nl - pos);
            pos = nl + 1;
            return out;
        }

        void read_le_doubles(Matrix& m) {
            const std::size_t need = m.size() * sizeof(double);
            if (pos + need > bytes.size()) throw parse_error("artifact: truncated weight block");
            if constexpr (std::endian::native == std::endian::little) {
                std::memcpy(m.data(), bytes.data() + pos, need);
            } else {
                for (std::size_t i = 0; i < m.size(); ++i) {
                    std::uint64_t word = 0;
                    for (int b = 7; b >= 0; --b)
                        word = (word << 8) | static_cast<unsigned char>(bytes[pos + i * 8 + static_cast<std::size_t>(b)]);
                    double d;
                    std::memcpy(&d, &word, 8);
                    m.data()[i] = d;
                }
            }
            pos += need;
        }
    };

    static void append_le_doubles(std::string& out, const Matrix& m) {
        if constexpr (std::endian::native == std::endian::little) {
            out.append(reinterpret_cast<const char*>(m.data()), m.size() * sizeof(double));
        } else {
            for (std::size_t i = 0; i < m.size(); ++i) {
                std::uint64_t word;
                std::memcpy(&word, m.data() + i, 8);
                for (int b = 0; b < 8; ++b) out += static_cast<char>((word >> (8 * b)) & 0xff);
            }
        }
    }

    std::vector<std::pair<std::string, std::string>> manifest_;
    std::vector<std::pair<std::string, Matrix>> blocks_;
};

// ---------------------------------------------------------------------------
// GcnModel / RegressorModel <-> artifact
// ---------------------------------------------------------------------------

struct ArtifactMeta {
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

inline ModelArtifact make_artifact(const GcnModel& gcn, const ArtifactMeta& meta) {
    if (!gcn.frozen) throw state_error("make_artifact: encoder must be frozen");
    ModelArtifact art;
    art.set("format", "1");
    art.set("created_seed", std::to_string(meta.seed));
    art.set("config_hash", std::to_string(meta.config_hash));
    art.set("gcn.version", std::to_string(gcn.version));
    art.set("gcn.feature_width", std::to_string(kNodeFeatureWidth));
    art.set("gcn.hidden", std::to_string(kGcnHiddenWidth));
    art.set("gcn.gr_width", std::to_string(kGrWidth));
    art.set("gcn.head_hidden", std::to_string(kHeadHiddenWidth));
    art.set("gcn.labels", std::to_string(kPretrainLabelCount));
    art.set("gcn.multitask", "1");  // one shared encoder for all three labels
    art.set("regressor.present", "0");

    art.add_block("gcn.conv1", gcn.conv1);
    art.add_block("gcn.conv2", gcn.conv2);
    art.add_block("gcn.head_w1", gcn.head_w1);
    art.add_block("gcn.head_b1", gcn.head_b1);
    art.add_block("gcn.head_w2", gcn.head_w2);
    art.add_block("gcn.head_b2", gcn.head_b2);
    Matrix mean(1, kPretrainLabelCount), stddev(1, kPretrainLabelCount);
    for (std::size_t k = 0; k < kPretrainLabelCount; ++k) {
        mean(0, k) = gcn.label_mean[k];
        stddev(0, k) = gcn.label_std[k];
    }
    art.add_block("gcn.label_mean", std::move(mean));
    art.add_block("gcn.label_std", std::move(stddev));
    return art;
}

inline void attach_regressor(ModelArtifact& art, const RegressorModel& reg) {
    art.set("regressor.present", "1");
    art.set("regressor.hidden", "1000,500,100");
    art.set("regressor.train_fingerprint", std::to_string(reg.train_fingerprint));
    art.set("descriptor.separator_encoding",
            reg.convention.separator_encoding == DescriptorConvention::SeparatorEncoding::Scalar ? "scalar"
                                                                                                 : "onehot");
    art.set("descriptor.mol_divisor", format_double(reg.convention.mol_divisor));
    art.set("descriptor.loading_divisor", format_double(reg.convention.loading_divisor));
    art.set("descriptor.length", std::to_string(reg.convention.length()));
    art.add_block("reg.w1", reg.w1);
    art.add_block("reg.b1", reg.b1);
    art.add_block("reg.w2", reg.w2);
    art.add_block("reg.b2", reg.b2);
    art.add_block("reg.w3", reg.w3);
    art.add_block("reg.b3", reg.b3);
    art.add_block("reg.w4", reg.w4);
    art.add_block("reg.b4", reg.b4);
}

inline GcnModel gcn_from_artifact(const ModelArtifact& art) {
    GcnModel gcn;
    gcn.conv1 = art.block("gcn.conv1");
    gcn.conv2 = art.block("gcn.conv2");
    gcn.head_w1 = art.block("gcn.head_w1");
    gcn.head_b1 = art.block("gcn.head_b1");
    gcn.head_w2 = art.block("gcn.head_w2");
    gcn.head_b2 = art.block("gcn.head_b2");
    const Matrix& mean = art.block("gcn.label_mean");
    const Matrix& stddev = art.block("gcn.label_std");
    for (std::size_t k = 0; k < kPretrainLabelCount; ++k) {
        gcn.label_mean[k] = mean(0, k);
        gcn.label_std[k] = stddev(0, k);
    }
    gcn.frozen = true;
    gcn.version = art.get_u64("gcn.version");
    if (gcn.version != gcn.weight_hash())
        throw parse_error("artifact: encoder weight hash does not match the manifest version");
    return gcn;
}

inline RegressorModel regressor_from_artifact(const ModelArtifact& art) {
    if (art.get("regressor.present") != "1")
        throw config_error("artifact holds no regressor; run the train command first");
    RegressorModel reg;
    reg.w1 = art.block("reg.w1");
    reg.b1 = art.block("reg.b1");
    reg.w2 = art.block("reg.w2");
    reg.b2 = art.block("reg.b2");
    reg.w3 = art.block("reg.w3");
    reg.b3 = art.block("reg.b3");
    reg.w4 = art.block("reg.w4");
    reg.b4 = art.block("reg.b4");
    reg.convention.separator_encoding = art.get("descriptor.separator_encoding") == "scalar"
                                            ? DescriptorConvention::SeparatorEncoding::Scalar
                                            : DescriptorConvention::SeparatorEncoding::OneHot;
    reg.convention.mol_divisor = art.get_f64("descriptor.mol_divisor");
    reg.convention.loading_divisor = art.get_f64("descriptor.loading_divisor");
    reg.convention.gcn_version = art.get_u64("gcn.version");
    reg.train_fingerprint = art.get_u64("regressor.train_fingerprint");
    if (art.get_u64("descriptor.length") != reg.convention.length())
        throw convention_error("artifact: descriptor length " + art.get("descriptor.length") +
                               " does not match the stored convention");
    return reg;
}

}  // namespace fgcn
