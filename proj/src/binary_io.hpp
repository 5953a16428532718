#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caerom/error.hpp"

namespace caerom::detail {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
    }

    void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void f64s(std::span<const double> v) { raw(v.data(), v.size() * 8); }

    void finish() {
        out_.flush();
        if (!out_) throw IoError("write failed: " + path_);
    }

private:
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

    std::ofstream out_;
    std::string path_;
};

/// Reads the whole file up front; every accessor reports the failing offset.
class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open " + path);
        data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::uint64_t offset() const { return pos_; }

    void expect_magic(std::string_view m) {
        need(m.size(), "magic");
        if (std::memcmp(data_.data(), m.data(), m.size()) != 0) {
            throw FormatError("bad magic, expected '" + std::string(m) + "'", 0);
        }
        pos_ += m.size();
    }
    std::uint8_t u8() {
        need(1, "u8");
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint64_t u64() { return pod<std::uint64_t>("u64"); }
    double f64() { return pod<double>("f64"); }
    void f64s(std::span<double> out) {
        need(out.size() * 8, "f64 array");
        std::memcpy(out.data(), data_.data() + pos_, out.size() * 8);
        pos_ += out.size() * 8;
    }
    bool at_end() const { return pos_ == data_.size(); }
    std::uint64_t remaining() const { return data_.size() - pos_; }

private:
    template <typename T>
    T pod(const char* what) {
        need(sizeof(T), what);
        T v;
        std::memcpy(&v, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void need(std::uint64_t n, const char* what) {
        if (data_.size() - pos_ < n) throw FormatError(std::string("truncated file while reading ") + what, pos_);
    }

    std::vector<char> data_;
    std::uint64_t pos_ = 0;
};

}  // namespace caerom::detail
