#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace paramforge
{
    // A value or a search does not fit in the configured representation or budget.
    class CapacityError : public std::runtime_error
    {
        public:
            using std::runtime_error::runtime_error;
    };

    // A query violates the precondition of the operation it was passed to.
    class InvalidQuery : public std::invalid_argument
    {
        public:
            using std::invalid_argument::invalid_argument;
    };

    class InvalidThresholds : public std::invalid_argument
    {
        public:
            using std::invalid_argument::invalid_argument;
    };

    class NotApplicable : public std::logic_error
    {
        public:
            using std::logic_error::logic_error;
    };

    class UniverseMismatch : public std::logic_error
    {
        public:
            using std::logic_error::logic_error;
    };

    class ForgeExhausted : public std::runtime_error
    {
        public:
            ForgeExhausted(const std::string & what, std::size_t level, std::size_t attempts,
                    std::size_t small_failures, std::size_t large_failures) :
                std::runtime_error(what),
                level(level),
                attempts(attempts),
                small_failures(small_failures),
                large_failures(large_failures)
            {
            }

            std::size_t level, attempts, small_failures, large_failures;
    };
}
