#pragma once

#include <paramforge/errors.hh>

#include <boost/multiprecision/cpp_int.hpp>

#include <json.hpp>

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace paramforge
{
    using BigInt = boost::multiprecision::cpp_int;
    using Rational = boost::multiprecision::cpp_rational;

    // Integers up to this many bits are kept as plain values; anything larger
    // must be an exact power of two and is kept as its exponent.
    inline constexpr std::size_t materialize_bits = 1u << 16;

    auto three_way(const BigInt & a, const BigInt & b) -> std::strong_ordering;
    auto bit_length(const BigInt & x) -> std::size_t;
    auto is_power_of_two(const BigInt & x) -> bool;
    auto to_decimal(const BigInt & x) -> std::string;

    // offset + coeff * 2^shift, with coeff >= 0 and shift >= 0. Small shifts are
    // folded into the offset, so an exponent with coeff == 0 is a plain integer.
    class Exponent
    {
        public:
            Exponent() = default;
            Exponent(BigInt value);
            Exponent(BigInt offset, BigInt coeff, BigInt shift);

            auto offset() const -> const BigInt & { return _offset; }
            auto coeff() const -> const BigInt & { return _coeff; }
            auto shift() const -> const BigInt & { return _shift; }

            auto is_plain() const -> bool { return _coeff == 0; }

            // The exact value; throws CapacityError unless is_plain().
            auto plain() const -> const BigInt &;

            auto operator+(const Exponent & other) const -> Exponent;
            auto operator-(const Exponent & other) const -> Exponent;
            auto operator*(const BigInt & k) const -> Exponent;

            auto operator==(const Exponent & other) const -> bool;
            auto operator<=>(const Exponent & other) const -> std::strong_ordering;

            auto to_json() const -> nlohmann::json;
            static auto from_json(const nlohmann::json & j) -> Exponent;

        private:
            auto normalise() -> void;

            BigInt _offset, _coeff, _shift;
    };

    // A positive integer, either materialized or as 2^exponent.
    class BigNumber
    {
        public:
            BigNumber() : _value(1) { }
            BigNumber(BigInt value);
            BigNumber(std::uint64_t value) : BigNumber(BigInt(value)) { }
            BigNumber(int value) : BigNumber(BigInt(value)) { }

            static auto power_of_two(const Exponent & e) -> BigNumber;

            auto is_materialized() const -> bool { return _materialized; }
            auto value() const -> const BigInt &;
            auto to_u64() const -> std::optional<std::uint64_t>;

            // Exponent e with this == 2^e, if this is a power of two.
            auto log2_exact() const -> std::optional<Exponent>;

            auto operator*(const BigNumber & other) const -> BigNumber;
            auto pow(const BigInt & k) const -> BigNumber;
            auto ceil_div(const BigNumber & other) const -> BigNumber;

            auto operator==(const BigNumber & other) const -> bool;
            auto operator<=>(const BigNumber & other) const -> std::strong_ordering;

            auto to_json() const -> nlohmann::json;
            auto to_string() const -> std::string;
            static auto from_json(const nlohmann::json & j) -> BigNumber;

        private:
            bool _materialized = true;
            BigInt _value;
            Exponent _log2;
    };

    enum class ProfileMode
    {
        literal,
        scaled
    };

    struct FastLevel
    {
        BigNumber m, m_circ, small, large;
        std::optional<Rational> p;
    };

    struct FastProfile
    {
        ProfileMode mode = ProfileMode::scaled;
        std::vector<FastLevel> levels;
        std::size_t i_star = 0;

        auto depth() const -> std::size_t { return levels.size(); }

        // Materialized per-level quantities, for levels that are actually built.
        auto width(std::size_t i) const -> std::size_t;
        auto small_at(std::size_t i) const -> std::size_t;
        auto large_at(std::size_t i) const -> std::size_t;
    };

    struct ScaledLevel
    {
        std::uint64_t m, small, large;
        std::optional<Rational> p;
    };

    struct Verdict
    {
        bool pass = true;
        std::optional<std::size_t> level;
        std::string reason;
    };

    auto self_power(std::size_t i) -> BigInt;

    // ((m°)^{i^i})^{4 (m°)^{i^i}}
    auto fast_bound(const BigNumber & m_circ, std::size_t i) -> BigNumber;

    auto literal_fast_prefix(std::size_t depth) -> FastProfile;
    auto make_scaled_profile(const std::vector<ScaledLevel> & levels, std::size_t i_star) -> FastProfile;

    auto check_fast(const FastProfile & profile) -> Verdict;
    auto g(const FastProfile & profile, std::size_t i) -> BigNumber;
    auto check_obs_four(const FastProfile & profile, std::size_t i) -> bool;

    auto rational_to_json(const Rational & r) -> nlohmann::json;
    auto rational_from_json(const nlohmann::json & j) -> Rational;
    auto bigint_to_json(const BigInt & x) -> nlohmann::json;
    auto bigint_from_json(const nlohmann::json & j) -> BigInt;

    auto profile_to_json(const FastProfile & profile) -> nlohmann::json;
    auto profile_from_json(const nlohmann::json & j) -> FastProfile;
    auto load_profile(const std::string & path) -> FastProfile;
}
