pub mod cantor;
pub mod cb;
pub mod fiber;
pub mod game;
pub mod map;
pub mod scheme;

use lusin_core::rational::Rational;
use lusin_core::sorgenfrey::SorgenfreyPiBase;

pub fn pi_base(endpoints: &[Rational]) -> SorgenfreyPiBase {
    if endpoints.is_empty() {
        SorgenfreyPiBase::new()
    } else {
        SorgenfreyPiBase::with_endpoints(endpoints.iter().cloned())
    }
}
