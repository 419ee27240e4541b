//! Runtime selection of vector width for the O(n^3) kernels.
//!
//! Each kernel is written once as an `#[inline(always)]` generic body taking a
//! `const FMA: bool`; [`dispatch!`] stamps out AVX-512 and AVX2 copies with the
//! matching `target_feature` and picks one at run time.

use crate::scalar::Scalar;

/// `a * b + c`, fused when the caller was compiled with FMA.
#[inline(always)]
pub(super) fn mul_add<T: Scalar, const FMA: bool>(a: T, b: T, c: T) -> T {
    if FMA {
        a.mul_add(b, c)
    } else {
        a * b + c
    }
}

macro_rules! dispatch {
    (
        $(#[$meta:meta])*
        $vis:vis fn $name:ident<T: Scalar>($($arg:ident : $ty:ty),* $(,)?) -> $ret:ty => $body:ident
    ) => {
        $(#[$meta])*
        $vis fn $name<T: $crate::scalar::Scalar>($($arg: $ty),*) -> $ret {
            #[cfg(target_arch = "x86_64")]
            {
                #[target_feature(enable = "avx512f,avx512vl,avx2,fma")]
                unsafe fn wide<T: $crate::scalar::Scalar>($($arg: $ty),*) -> $ret {
                    $body::<T, true>($($arg),*)
                }
                #[target_feature(enable = "avx2,fma")]
                unsafe fn narrow<T: $crate::scalar::Scalar>($($arg: $ty),*) -> $ret {
                    $body::<T, true>($($arg),*)
                }
                if std::arch::is_x86_feature_detected!("avx512f")
                    && std::arch::is_x86_feature_detected!("avx512vl")
                    && std::arch::is_x86_feature_detected!("fma")
                {
                    // SAFETY: the required CPU features were detected above.
                    return unsafe { wide::<T>($($arg),*) };
                }
                if std::arch::is_x86_feature_detected!("avx2")
                    && std::arch::is_x86_feature_detected!("fma")
                {
                    // SAFETY: the required CPU features were detected above.
                    return unsafe { narrow::<T>($($arg),*) };
                }
            }
            $body::<T, false>($($arg),*)
        }
    };
}

pub(super) use dispatch;
