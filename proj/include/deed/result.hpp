#pragma once

#include <string>
#include <utility>
#include <variant>

namespace deed {

// Every operation failure in the project is one of these codes. The
// numeric value is not part of any wire format; reports serialize the
// symbolic name from errc_name().
enum class Errc {
    // key material and credentials
    SeedTooShort,
    MalformedSignature,
    UnsupportedEntropyLength,
    MnemonicChecksum,
    UnknownWord,
    MalformedInput,
    // registry ledger
    UnknownAuthor,
    ClockRegression,
    NotIssuer,
    UnknownCredential,
    AlreadyRevoked,
    // issuance state machines
    IllegalTransition,
    ReusedKey,
    NotVerified,
    AlreadyIssued,
    WalletKeyMismatch,
    RevokedOwnerCredential,
    MissingProof,
    WrongConfirmer,
    DueDiligenceFailed,
    // content store
    NotFound,
    DigestMismatch,
    DanglingMedia,
    UnknownRequestor,
    // contracts
    UnknownMarketplace,
    StaleSession,
    SessionNotVerified,
    NotOwner,
    TimingViolation,
    UnresolvedDossier,
    InvalidParams,
    ConditionFailed,
    OwnerSelfBid,
    BelowReserve,
    InsufficientBalance,
    ContractNotOpen,
    TooLateToWithdraw,
    NoActiveOffer,
    BadShareId,
    NoSuchOffer,
    IdentityMismatch,
    NothingToRefund,
    WrongPaymentAmount,
    PaymentTimeout,
    // harness
    ScriptError,
    IoFailure,
};

const char* errc_name(Errc c);

struct Error {
    Errc code;
    std::string detail;
    // Carries the condition number for ConditionFailed and similar
    // numbered diagnostics; zero otherwise.
    int arg = 0;
};

inline Error err(Errc code, std::string detail = {}, int arg = 0) {
    return Error{code, std::move(detail), arg};
}

struct Unit {};

template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error error) : v_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(v_); }
    T& value() & { return std::get<T>(v_); }
    T&& value() && { return std::get<T>(std::move(v_)); }

    const Error& error() const { return std::get<Error>(v_); }

private:
    std::variant<T, Error> v_;
};

}  // namespace deed
