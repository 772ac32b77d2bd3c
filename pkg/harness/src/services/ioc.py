from services.experiment_service import ExperimentService
from services.method_service import MethodService
from services.report_service import ReportService
from services.verify_service import VerifyService

ioc = {}


def initiate_services():
    ioc["MethodService"] = MethodService()
    ioc["ReportService"] = ReportService()
    ioc["VerifyService"] = VerifyService()
    ioc["ExperimentService"] = ExperimentService(
        method_service=ioc["MethodService"],
        report_service=ioc["ReportService"],
        verify_service=ioc["VerifyService"],
    )


initiate_services()
