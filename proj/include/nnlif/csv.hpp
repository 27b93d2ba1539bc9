#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "nnlif/errors.hpp"

namespace nnlif::csv {

/// Formats a double with 15 significant digits, enough to reconstruct the
/// value exactly on round-trip and to make file diffs meaningful.
inline std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    return buf;
}

inline std::string format_number(const std::optional<double>& x) {
    return x ? format_number(*x) : std::string();
}

/// Row-oriented CSV document: a fixed header, data rows, and optional
/// trailing `# key=value` comment lines for run metadata.
class Document {
public:
    explicit Document(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw IoError("csv row width " + std::to_string(cells.size()) +
                          " does not match header width " + std::to_string(header_.size()));
        rows_.push_back(std::move(cells));
    }

    void add_comment(std::string line) { comments_.push_back(std::move(line)); }

    std::string to_string() const {
        std::string out = join(header_);
        for (const auto& row : rows_) {
            out += '\n';
            out += join(row);
        }
        for (const auto& c : comments_) {
            out += "\n# ";
            out += c;
        }
        out += '\n';
        return out;
    }

private:
    static std::string join(const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) line += ',';
            line += cells[i];
        }
        return line;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::string> comments_;
};

/// Writes content to path atomically: the bytes land in a sibling temp file
/// first and are moved into place with a rename, so readers never observe a
/// partial file and a failed run never clobbers a previous artifact.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string());
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw IoError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

inline void write_document(const std::filesystem::path& path, const Document& doc) {
    write_atomic(path, doc.to_string());
}

} // namespace nnlif::csv
