// Fits three-cell codes on the default box and writes both views of the
// partition next to the working directory.

#include <iostream>

#include "hypersmml/io.hpp"
#include "hypersmml/smml.hpp"
#include "hypersmml/svg.hpp"

int main() {
    using namespace hypersmml;
    const int n = 4, p = 1;
    const TruncatedDomain domain = default_domain(p, 128);

    for (const int m : {1, 2, 3}) {
        const FitResult fit = fit_smml(m, domain, n, p, 8, 7);
        std::cout << "m = " << m << ": I1 = " << fit.code.I1 << " nats after " << fit.iterations
                  << " iterations\n";
        if (m == 3) {
            detail::write_text_file("tessellation_affine.svg",
                                    render_code_svg(fit.code, n, PlotView::Affine));
            detail::write_text_file("tessellation_hyperbolic.svg",
                                    render_code_svg(fit.code, n, PlotView::Hyperbolic));
            for (const Facet& f : code_facets(fit.code, n)) {
                std::cout << "  boundary between cells " << f.cell_i << " and " << f.cell_j
                          << ": ";
                if (!f.plane)
                    std::cout << "misses the model\n";
                else if (std::holds_alternative<VerticalPlane>(*f.plane))
                    std::cout << "vertical plane\n";
                else
                    std::cout << "hemisphere of radius "
                              << std::get<SpherePlane>(*f.plane).radius << "\n";
            }
        }
    }
    std::cout << "wrote tessellation_affine.svg and tessellation_hyperbolic.svg\n";
    return 0;
}
