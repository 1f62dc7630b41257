#pragma once

// Generated by tools/gen_type_a_params.py (seed 2015). q is a Solinas prime and
// p = h*q - 1 is prime with p = 3 (mod 4).

namespace eidcloud::pairing::params {

inline constexpr const char* kP80 =
    "d4bd9fe6cf361058f70f8d72dcad6178c23b9faab6fa4a25ffb505c6f70d7c22"
    "d610ba0ed89560f93fc50f292c21792af9df131c10986f4b4225ee10a38afa5f";
inline constexpr const char* kQ80 = "100000000001fffffffffffffffffffffffffffff";

inline constexpr const char* kP128 =
    "876696a11a5f918c7719a21274a7ac97f87170aa4e2962aa295981fc6516f8ab"
    "c7cd56b4b0856d9ec98c72f97191ed12c09042dceb401cb8ea61ce1e60d9030e"
    "43cb22c349db7b8978392623cb102501541494456ca54d0cb4aafcf41b92e150"
    "8bcf7174eeb3e10669441dc231abbf616a99cd856a2e20562da04c52043cb3d3"
    "7a88d772aee2fd1b625137bb3db41a4531e1b923c829ba339b01b4780a479df7"
    "c96437b215839b857a5652c91dc483eaa670b9aedf23bfcefe4ed4f619936d0f";
inline constexpr const char* kQ128 =
    "fffffffffffffffbffffffffffffffffffffffffffffffffffffffffffffffff";

}  // namespace eidcloud::pairing::params
