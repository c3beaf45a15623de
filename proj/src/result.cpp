#include "deed/result.hpp"

namespace deed {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::SeedTooShort: return "SeedTooShort";
        case Errc::MalformedSignature: return "MalformedSignature";
        case Errc::UnsupportedEntropyLength: return "UnsupportedEntropyLength";
        case Errc::MnemonicChecksum: return "MnemonicChecksum";
        case Errc::UnknownWord: return "UnknownWord";
        case Errc::MalformedInput: return "MalformedInput";
        case Errc::UnknownAuthor: return "UnknownAuthor";
        case Errc::ClockRegression: return "ClockRegression";
        case Errc::NotIssuer: return "NotIssuer";
        case Errc::UnknownCredential: return "UnknownCredential";
        case Errc::AlreadyRevoked: return "AlreadyRevoked";
        case Errc::IllegalTransition: return "IllegalTransition";
        case Errc::ReusedKey: return "ReusedKey";
        case Errc::NotVerified: return "NotVerified";
        case Errc::AlreadyIssued: return "AlreadyIssued";
        case Errc::WalletKeyMismatch: return "WalletKeyMismatch";
        case Errc::RevokedOwnerCredential: return "RevokedOwnerCredential";
        case Errc::MissingProof: return "MissingProof";
        case Errc::WrongConfirmer: return "WrongConfirmer";
        case Errc::DueDiligenceFailed: return "DueDiligenceFailed";
        case Errc::NotFound: return "NotFound";
        case Errc::DigestMismatch: return "DigestMismatch";
        case Errc::DanglingMedia: return "DanglingMedia";
        case Errc::UnknownRequestor: return "UnknownRequestor";
        case Errc::UnknownMarketplace: return "UnknownMarketplace";
        case Errc::StaleSession: return "StaleSession";
        case Errc::SessionNotVerified: return "SessionNotVerified";
        case Errc::NotOwner: return "NotOwner";
        case Errc::TimingViolation: return "TimingViolation";
        case Errc::UnresolvedDossier: return "UnresolvedDossier";
        case Errc::InvalidParams: return "InvalidParams";
        case Errc::ConditionFailed: return "ConditionFailed";
        case Errc::OwnerSelfBid: return "OwnerSelfBid";
        case Errc::BelowReserve: return "BelowReserve";
        case Errc::InsufficientBalance: return "InsufficientBalance";
        case Errc::ContractNotOpen: return "ContractNotOpen";
        case Errc::TooLateToWithdraw: return "TooLateToWithdraw";
        case Errc::NoActiveOffer: return "NoActiveOffer";
        case Errc::BadShareId: return "BadShareId";
        case Errc::NoSuchOffer: return "NoSuchOffer";
        case Errc::IdentityMismatch: return "IdentityMismatch";
        case Errc::NothingToRefund: return "NothingToRefund";
        case Errc::WrongPaymentAmount: return "WrongPaymentAmount";
        case Errc::PaymentTimeout: return "PaymentTimeout";
        case Errc::ScriptError: return "ScriptError";
        case Errc::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

}  // namespace deed
