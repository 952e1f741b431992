#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "settle/common.hpp"
#include "settle/rational.hpp"

namespace settle {

// Grid dimensions: m rows counted from the north edge, n columns counted
// from the west edge.
struct Dims {
    uint32_t m = 1;
    uint32_t n = 1;

    Dims() = default;
    Dims(uint64_t rows, uint64_t cols) {
        if (rows == 0 || cols == 0) throw ContractError("Dims: m and n must be >= 1");
        if (rows > UINT32_MAX || cols > UINT32_MAX ||
            rows > UINT64_MAX / cols)
            throw ContractError("Dims: m*n overflows the addressable range");
        m = static_cast<uint32_t>(rows);
        n = static_cast<uint32_t>(cols);
    }

    uint64_t cells() const { return static_cast<uint64_t>(m) * n; }

    friend bool operator==(const Dims& a, const Dims& b) { return a.m == b.m && a.n == b.n; }
    friend bool operator!=(const Dims& a, const Dims& b) { return !(a == b); }
};

// One lot of the tract, 1-based: row i in [1, m] from the north, column j
// in [1, n] from the west. The south neighbor of (i, j) is (i+1, j).
struct Lot {
    uint32_t i = 1;
    uint32_t j = 1;

    friend bool operator==(const Lot& a, const Lot& b) { return a.i == b.i && a.j == b.j; }
    friend bool operator!=(const Lot& a, const Lot& b) { return !(a == b); }
};

// Set of occupied lots on a fixed grid. Bit-packed row-major; storage is
// O(mn) bits. Immutable by convention once shared: every predicate below is
// read-only, mutation belongs to a single owner (see BuildState).
class Config {
public:
    Config() : Config(Dims{}) {}
    explicit Config(Dims dims)
        : dims_(dims), bits_((dims.cells() + 63) / 64, 0), count_(0) {}

    Config(Dims dims, std::initializer_list<Lot> lots) : Config(dims) {
        for (const Lot& lot : lots) set(lot);
    }

    const Dims& dims() const { return dims_; }
    uint64_t occupancy() const { return count_; }

    // |C| / (mn), exact and deliberately unreduced: numerator is the
    // occupancy, denominator is the lot count.
    Rational density() const { return Rational::unreduced(count_, dims_.cells()); }

    bool test(Lot lot) const { return test_flat(flat(lot)); }

    void set(Lot lot) {
        uint64_t p = flat(lot);
        if (!test_flat(p)) {
            bits_[p >> 6] |= 1ULL << (p & 63);
            ++count_;
        }
    }

    void clear(Lot lot) {
        uint64_t p = flat(lot);
        if (test_flat(p)) {
            bits_[p >> 6] &= ~(1ULL << (p & 63));
            --count_;
        }
    }

    // 0-based row-major index; bounds are the caller's responsibility.
    bool test_flat(uint64_t p) const { return (bits_[p >> 6] >> (p & 63)) & 1; }

    void set_flat(uint64_t p) {
        if (!test_flat(p)) {
            bits_[p >> 6] |= 1ULL << (p & 63);
            ++count_;
        }
    }

    // Converts a 1-based lot to the flat index, validating bounds.
    uint64_t flat(Lot lot) const {
        if (lot.i < 1 || lot.i > dims_.m || lot.j < 1 || lot.j > dims_.n)
            throw ContractError("Lot (" + std::to_string(lot.i) + "," + std::to_string(lot.j) +
                                ") outside " + std::to_string(dims_.m) + "x" +
                                std::to_string(dims_.n) + " grid");
        return static_cast<uint64_t>(lot.i - 1) * dims_.n + (lot.j - 1);
    }

    Lot lot_at(uint64_t p) const {
        return Lot{static_cast<uint32_t>(p / dims_.n) + 1,
                   static_cast<uint32_t>(p % dims_.n) + 1};
    }

    // Full popcount scan; the cached count must always agree.
    uint64_t recount() const {
        uint64_t c = 0;
        for (uint64_t w : bits_) c += static_cast<uint64_t>(__builtin_popcountll(w));
        return c;
    }

    std::vector<Lot> lots() const {
        std::vector<Lot> out;
        out.reserve(count_);
        for (uint64_t p = 0; p < dims_.cells(); ++p)
            if (test_flat(p)) out.push_back(lot_at(p));
        return out;
    }

    friend bool operator==(const Config& a, const Config& b) {
        return a.dims_ == b.dims_ && a.bits_ == b.bits_;
    }
    friend bool operator!=(const Config& a, const Config& b) { return !(a == b); }

    // Total order for set semantics in enumeration and census results:
    // dims first, then row-major occupancy words.
    friend bool operator<(const Config& a, const Config& b) {
        if (a.dims_.m != b.dims_.m) return a.dims_.m < b.dims_.m;
        if (a.dims_.n != b.dims_.n) return a.dims_.n < b.dims_.n;
        return a.bits_ < b.bits_;
    }

private:
    Dims dims_;
    std::vector<uint64_t> bits_;
    uint64_t count_;
};

inline uint64_t occupancy(const Config& config) { return config.occupancy(); }
inline Rational density(const Config& config) { return config.density(); }

namespace detail {

// Blocking and buildability on flat 0-based indices, no bounds checks.
// These carry the whole model: a house is blocked when its east, west and
// south neighbor lots all exist and are all occupied; the north edge plays
// no role. Callers in hot loops come through here.

inline bool blocked_flat(const Config& c, uint64_t p) {
    const uint32_t n = c.dims().n;
    const uint64_t j = p % n;
    if (j == 0 || j + 1 == n) return false;           // west or east edge
    if (p + n >= c.dims().cells()) return false;      // south edge
    return c.test_flat(p - 1) && c.test_flat(p + 1) && c.test_flat(p + n);
}

// Whether a house may be added at empty lot p: the new house must not be
// blocked, and none of the at most three houses west, east or north of p
// (the only ones whose block set contains p) may become blocked.
inline bool can_build_flat(const Config& c, uint64_t p) {
    const uint32_t n = c.dims().n;
    const uint64_t cells = c.dims().cells();
    const uint64_t j = p % n;
    const bool has_w = j > 0;
    const bool has_e = j + 1 < n;
    const bool has_s = p + n < cells;

    if (has_w && has_e && has_s && c.test_flat(p - 1) && c.test_flat(p + 1) &&
        c.test_flat(p + n))
        return false;
    if (has_w && has_s && j >= 2 && c.test_flat(p - 1) && c.test_flat(p - 2) &&
        c.test_flat(p - 1 + n))
        return false;
    if (has_e && has_s && j + 2 < n && c.test_flat(p + 1) && c.test_flat(p + 2) &&
        c.test_flat(p + 1 + n))
        return false;
    if (p >= n && has_w && has_e && c.test_flat(p - n) && c.test_flat(p - n - 1) &&
        c.test_flat(p - n + 1))
        return false;
    return true;
}

} // namespace detail

// Would a house on `lot` be blocked from sunlight? Defined for occupied and
// empty lots alike; the sequential builder and the maximality check both ask
// the hypothetical question.
inline bool is_blocked(const Config& config, Lot lot) {
    return detail::blocked_flat(config, config.flat(lot));
}

// No house in the configuration is blocked.
inline bool is_permissible(const Config& config) {
    const uint64_t cells = config.dims().cells();
    for (uint64_t p = 0; p < cells; ++p)
        if (config.test_flat(p) && detail::blocked_flat(config, p)) return false;
    return true;
}

// config ∪ {lot} stays permissible. O(1): only the new house and its west,
// east and north neighbors can change state.
inline bool can_build(const Config& config, Lot lot) {
    uint64_t p = config.flat(lot);
    if (config.test_flat(p))
        throw ContractError("can_build: lot (" + std::to_string(lot.i) + "," +
                            std::to_string(lot.j) + ") is already occupied");
    return detail::can_build_flat(config, p);
}

// Permissible and not extendable on any empty lot.
inline bool is_maximal(const Config& config) {
    if (!is_permissible(config)) return false;
    const uint64_t cells = config.dims().cells();
    for (uint64_t p = 0; p < cells; ++p)
        if (!config.test_flat(p) && detail::can_build_flat(config, p)) return false;
    return true;
}

// East-west reflection: column j maps to n+1-j. North-south is NOT a
// symmetry of the model and is never normalized away.
inline Config mirror_ew(const Config& config) {
    Config out(config.dims());
    const uint32_t n = config.dims().n;
    for (uint64_t p = 0; p < config.dims().cells(); ++p)
        if (config.test_flat(p)) {
            uint64_t row = p / n, j = p % n;
            out.set_flat(row * n + (n - 1 - j));
        }
    return out;
}

// m lines of n characters, '#' occupied, '.' empty, north row first.
inline std::string render_ascii(const Config& config) {
    std::string out;
    const uint32_t m = config.dims().m, n = config.dims().n;
    out.reserve(static_cast<size_t>(m) * (n + 1));
    for (uint32_t i = 0; i < m; ++i) {
        for (uint32_t j = 0; j < n; ++j)
            out += config.test_flat(static_cast<uint64_t>(i) * n + j) ? '#' : '.';
        if (i + 1 < m) out += '\n';
    }
    return out;
}

// Rows joined with '/', suitable for CSV cells and map keys in reports.
inline std::string packed_string(const Config& config) {
    std::string s = render_ascii(config);
    for (char& c : s)
        if (c == '\n') c = '/';
    return s;
}

inline Config config_from_packed(Dims dims, const std::string& packed) {
    Config out(dims);
    uint64_t p = 0;
    uint32_t row_len = 0, rows = 1;
    for (char c : packed) {
        if (c == '/') {
            if (row_len != dims.n) throw ContractError("packed config: bad row length");
            ++rows;
            row_len = 0;
            continue;
        }
        if (c != '#' && c != '.')
            throw ContractError(std::string("packed config: invalid character '") + c + "'");
        if (row_len >= dims.n) throw ContractError("packed config: bad row length");
        if (c == '#') out.set_flat(p);
        ++p;
        ++row_len;
    }
    if (rows != dims.m || row_len != dims.n)
        throw ContractError("packed config: wrong shape");
    return out;
}

// Textual config file: first line "m n", then the ASCII rendering.
inline void write_config(std::ostream& os, const Config& config) {
    os << config.dims().m << " " << config.dims().n << "\n"
       << render_ascii(config) << "\n";
}

inline Config parse_config(std::istream& is) {
    uint64_t m = 0, n = 0;
    std::string header;
    if (!std::getline(is, header)) throw ContractError("config file: missing header line");
    {
        std::istringstream hs(header);
        if (!(hs >> m >> n)) throw ContractError("config file: header must be \"m n\"");
        std::string rest;
        if (hs >> rest) throw ContractError("config file: trailing tokens in header");
    }
    Dims dims(m, n);
    Config out(dims);
    for (uint64_t i = 0; i < m; ++i) {
        std::string line;
        if (!std::getline(is, line))
            throw ContractError("config file: expected " + std::to_string(m) +
                                " rows, got " + std::to_string(i));
        if (line.size() != n)
            throw ContractError("config file: row " + std::to_string(i + 1) +
                                " has length " + std::to_string(line.size()) +
                                ", expected " + std::to_string(n));
        for (uint64_t j = 0; j < n; ++j) {
            char c = line[j];
            if (c == '#')
                out.set_flat(i * n + j);
            else if (c != '.')
                throw ContractError(std::string("config file: invalid character '") + c + "'");
        }
    }
    std::string tail;
    while (std::getline(is, tail))
        if (!tail.empty()) throw ContractError("config file: unexpected extra line");
    return out;
}

inline Config parse_config(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

} // namespace settle
