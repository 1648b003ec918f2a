"""
Uygulama Yapılandırma Yönetimi

Bu modül, simülasyon, optimizasyon, duyarlılık analizi ve tarama (sweep)
ayarlarını yönetir. Ayarlar şu sırayla yüklenir:
1. Ortam değişkenleri (.env dosyası veya sistem environment variables)
2. Varsayılan değerler (aşağıda tanımlanan default değerler)

Tarama çalıştırılırken öncelik sırası: Settings < JSON config dosyası < CLI bayrakları.
"""

from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict

from core.memory.params import SolverConfig
from core.optimizer.models import OptimizerConfig
from data_pipeline.config import log_axis


class Settings(BaseSettings):
    """
    Uygulama ayarları sınıfı.

    Tüm ayarlar ortam değişkenlerinden yüklenir. Eğer bir değişken
    tanımlı değilse, aşağıdaki varsayılan değerler kullanılır.

    Kullanım:
        from app.config import settings
        print(settings.solver_n_z)  # 200 (varsayılan) veya .env'den gelen değer
    """

    model_config = SettingsConfigDict(
        env_file=".env",  # Ortam değişkenlerinin yükleneceği dosya
        env_file_encoding="utf-8",
        case_sensitive=False,  # Ortam değişkeni isimleri büyük/küçük harf duyarsız
        extra="ignore",  # .env dosyasındaki ekstra alanları yoksay (hata verme)
    )

    # ============================================
    # Uygulama Genel Ayarları
    # ============================================
    app_name: str = "Quantum Memory Sensitivity"  # Uygulama adı (manifest ve CLI özetinde görünür)
    app_version: str = "0.1.0"  # Uygulama versiyonu

    # ============================================
    # Çözücü (Maxwell-Bloch) Ayarları
    # ============================================
    solver_n_z: int = 200  # z ızgarasındaki nokta sayısı
    solver_dt_max: float = 1e-3  # Otomatik zaman adımının üst sınırı
    solver_window_start: float = -3.0  # İntegrasyon penceresinin başı (sinyal FWHM biriminde)
    solver_window_end: float = 6.0  # İntegrasyon penceresinin sonu

    # ============================================
    # Optimizasyon Ayarları
    # ============================================
    optimizer_restarts: int = 5  # Nelder-Mead başlangıç noktası sayısı
    optimizer_max_evals: int = 400  # Her başlangıç için maksimum verim hesabı
    optimizer_param_tolerance: float = 1e-4  # Göreli parametre adımı bu değerin altına inerse dur

    # ============================================
    # Duyarlılık Analizi Ayarları
    # ============================================
    eps_m: float = 0.05  # Bellek parametrelerinin göreli dalgalanması (%5)
    eps_g: float = 0.05  # Kontrol alanı parametrelerinin göreli kayması (%5)
    fluctuation_samples: int = 1000  # Monte Carlo örnek sayısı
    sobol_grid_m: int = 33  # Sobol' tensör ızgarasında eksen başına düğüm (tek sayı)
    oat_grid_m: int = 21  # OAT taramasında eksen başına düğüm (tek sayı)
    seed: int = 0  # Mersenne Twister ana tohumu

    # ============================================
    # Tarama (Sweep) Ayarları
    # ============================================
    sweep_d_min: float = 1.0  # Optik derinlik ekseninin alt sınırı
    sweep_d_max: float = 100.0  # Optik derinlik ekseninin üst sınırı
    sweep_d_count: int = 20  # Optik derinlik ekseninde logaritmik nokta sayısı
    sweep_g_min: float = 0.01  # tau_FWHM * gamma ekseninin alt sınırı
    sweep_g_max: float = 3.0  # tau_FWHM * gamma ekseninin üst sınırı
    sweep_g_count: int = 18  # tau_FWHM * gamma ekseninde logaritmik nokta sayısı
    output_dir: str = "./results"  # Sonuç dosyalarının yazılacağı klasör
    workers: int = 1  # Paralel işçi süreç sayısı (1 = aynı süreçte çalış)

    # ============================================
    # Loglama
    # ============================================
    log_level: str = "INFO"
    log_format: str = "json"  # json veya console

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            n_z=self.solver_n_z,
            dt_max=self.solver_dt_max,
            window=(self.solver_window_start, self.solver_window_end),
        )

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            restarts=self.optimizer_restarts,
            max_evals=self.optimizer_max_evals,
            param_tolerance=self.optimizer_param_tolerance,
            seed=self.seed,
            solver=self.solver_config(),
        )

    def sweep_axes(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        d_values = tuple(log_axis(self.sweep_d_min, self.sweep_d_max, self.sweep_d_count))
        g_values = tuple(log_axis(self.sweep_g_min, self.sweep_g_max, self.sweep_g_count))
        return d_values, g_values


# Global ayarlar instance'ı
settings = Settings()
