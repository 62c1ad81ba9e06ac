from django.urls import path, include
from .views import (
    AuditRunViewSet,
    CurveView,
    PointView,
    SimulateView,
    status_view
)
from rest_framework.routers import DefaultRouter

router = DefaultRouter()
router.register(r'audit-runs', AuditRunViewSet, basename='audit-runs')


urlpatterns = [
    path('status/', status_view),
    path('', include(router.urls)),
    path('point/', PointView.as_view(), name='point'),
    path('curve/', CurveView.as_view(), name='curve'),
    path('simulate/', SimulateView.as_view(), name='simulate'),
]
